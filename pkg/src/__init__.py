"""
SC-DE - Evolución de densidad para códigos LDPC espacialmente acoplados multidimensionales
"""

__version__ = "1.0.0"
__author__ = "David Tech"
__description__ = "Umbrales BP, tasas de diseño y ráfagas de borrado en códigos MD-SC sobre el BEC"
