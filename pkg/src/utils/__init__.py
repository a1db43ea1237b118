"""
Utilidades del sistema - Configuración de ejecución, exportación y reproducción de figuras
"""

from .run_config import ConfigError, RunConfig, load_config_file, write_manifest

__all__ = ["ConfigError", "RunConfig", "load_config_file", "write_manifest"]
