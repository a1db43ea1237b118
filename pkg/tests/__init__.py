"""
Tests del sistema - Suite de pruebas unitarias e integración
"""
