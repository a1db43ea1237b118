"""
Configuración de logging para el motor de evolución de densidad
"""

import functools
import logging
import logging.handlers
import time
from pathlib import Path
from typing import Optional

from tqdm import tqdm

CONSOLE_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
FILE_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(processName)s] %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


class TqdmHandler(logging.StreamHandler):
    """Escribe a través de tqdm.write para no romper las barras de progreso"""

    def emit(self, record: logging.LogRecord) -> None:
        try:
            tqdm.write(self.format(record), file=self.stream)
        except Exception:
            self.handleError(record)


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    max_bytes: int = 10 * 1024 * 1024,  # 10MB
    backup_count: int = 5,
) -> None:
    """
    Configura consola y archivo rotativo para los barridos y la DE

    Args:
        log_level: Nivel de logging (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Ruta del archivo de log (opcional)
        max_bytes: Tamaño máximo del archivo antes de rotar
        backup_count: Número de archivos de respaldo
    """
    level = getattr(logging, str(log_level).upper(), logging.INFO)

    console = TqdmHandler()
    console.setLevel(level)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT, datefmt=DATE_FORMAT))
    handlers = [console]

    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        rotating = logging.handlers.RotatingFileHandler(
            path, maxBytes=max_bytes, backupCount=backup_count, encoding="utf-8"
        )
        rotating.setLevel(level)
        rotating.setFormatter(logging.Formatter(FILE_FORMAT, datefmt=DATE_FORMAT))
        handlers.append(rotating)

    logging.basicConfig(level=level, handlers=handlers, force=True)


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)


class CouplingLogger:
    """Logger con los eventos del motor: veredictos, umbrales, celdas y tasas"""

    def __init__(self, name: str):
        self.logger = get_logger(name)

    def info(self, message: str) -> None:
        self.logger.info(f"📐 {message}")

    def warning(self, message: str) -> None:
        self.logger.warning(f"⚠️ {message}")

    def error(self, message: str) -> None:
        self.logger.error(f"❌ {message}")

    def success(self, message: str) -> None:
        self.logger.info(f"✅ {message}")

    def debug(self, message: str) -> None:
        self.logger.debug(f"🔍 {message}")

    def verdict(self, outcome) -> None:
        """Veredicto de una ejecución de DE"""
        self.logger.info(
            f"🧮 {outcome.verdict.value} tras {outcome.iters_used} iteraciones "
            f"(P_b={outcome.final_pb:.3e}, Δ={outcome.residual_delta:.3e})"
        )

    def threshold_found(self, result) -> None:
        flag = " [irrecuperable]" if result.unrecoverable else ""
        self.logger.info(
            f"🎯 ε* = {result.eps_star:.6f} en [{result.lo:.6f}, {result.hi:.6f}] "
            f"con {result.evaluations} evaluaciones{flag}"
        )

    def sweep_cell(self, row) -> None:
        self.logger.info(
            f"📊 D={row.D} valor={row.w_or_z} ráfagas={row.bursts} -> ε*={row.eps_star}"
        )

    def rate_report(self, rate: float) -> None:
        self.logger.info(f"📏 Tasa de diseño: {rate:.12g}")


def log_performance(func):
    """Decorador que registra el tiempo de reloj de barridos y reproducciones"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            get_logger(func.__module__).info(
                f"⏱️ {func.__name__} ejecutado en {time.perf_counter() - start:.2f}s"
            )

    return wrapper


def log_exceptions(func):
    """Decorador para capturar y loggear excepciones"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except Exception as e:
            get_logger(func.__module__).error(f"💥 {type(e).__name__} en {func.__name__}: {e}")
            raise

    return wrapper
