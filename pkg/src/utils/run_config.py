"""
Configuración de ejecución: valores por defecto < archivo clave=valor < flags
"""

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple
import logging

from dotenv import dotenv_values
from jinja2 import Template

from ..core.ensemble import (
    Empty,
    EnsembleParams,
    Explicit,
    Hypercube,
    Hyperplane,
    ShorteningDomain,
    format_sections,
    parse_domain,
    parse_sections,
)
from ..core.threshold import BisectionSpec

logger = logging.getLogger(__name__)

COMMANDS = ("rate", "evolve", "threshold", "sweep", "reproduce")


class ConfigError(ValueError):
    """Error de interpretación de la configuración"""


MANIFEST_TEMPLATE = Template(
    """# Manifiesto de ejecución (formato clave=valor, reutilizable con --config)
command={{ c.command }}
figure={{ c.figure }}
dl={{ c.dl }}
dr={{ c.dr }}
L={{ c.L }}
D={{ c.D }}
w={{ c.w }}
M={{ c.M if c.M is not none else "" }}
domain.kind={{ domain.kind }}
domain.axis={{ domain.axis }}
domain.width={{ domain.width }}
domain.z={{ domain.z }}
domain.sections={{ domain.sections }}
eps={{ fmt(c.eps) }}
bursts={{ c.bursts }}
burst_eps={{ fmt(c.burst_eps) }}
random_bursts={{ c.random_bursts }}
placement={{ c.placement }}
min_distance={{ c.min_distance }}
seed={{ c.seed }}
tol_success={{ fmt(c.tol_success) }}
tol_stall={{ fmt(c.tol_stall) }}
tol_eps={{ fmt(c.tol_eps) }}
max_iters={{ c.max_iters }}
snapshots={{ c.snapshots }}
out={{ c.out }}
jobs={{ c.jobs }}
variable={{ c.variable }}
values={{ c.values }}
dims={{ c.dims }}
burst_counts={{ c.burst_counts }}
l_max={{ c.l_max }}
auto_L={{ c.auto_L | lower }}
uncoupled={{ c.uncoupled | lower }}
"""
)


@dataclass
class RunConfig:
    command: str = "rate"
    figure: str = ""
    dl: int = 3
    dr: int = 6
    L: int = 101
    D: int = 1
    w: int = 4
    M: Optional[int] = None
    domain: ShorteningDomain = field(default_factory=Empty)
    eps: float = 0.48
    bursts: str = ""
    burst_eps: float = 1.0
    random_bursts: int = 0
    placement: str = "spread"
    min_distance: int = 10
    seed: int = 0
    tol_success: float = 1e-10
    tol_stall: float = 1e-12
    tol_eps: float = 1e-4
    max_iters: int = 50000
    snapshots: str = ""
    out: str = "results"
    jobs: int = 1
    variable: str = "window_w"
    values: str = "2,3,4"
    dims: str = "1,2"
    burst_counts: str = "0,1,2"
    l_max: int = 512
    auto_L: bool = False
    uncoupled: bool = False
    progress: bool = True

    def params(self) -> EnsembleParams:
        return EnsembleParams(self.dl, self.dr, self.L, self.D, self.w, self.M)

    def bisection(self) -> BisectionSpec:
        return BisectionSpec(
            tol_eps=self.tol_eps,
            max_iters=self.max_iters,
            tol_success=self.tol_success,
            tol_stall=self.tol_stall,
        )

    def burst_list(self) -> List[Tuple[int, ...]]:
        try:
            return sorted(parse_sections(self.bursts, self.D))
        except ValueError as e:
            raise ConfigError(f"Ráfagas mal formadas: {e}") from None

    def snapshot_list(self) -> List[int]:
        return _int_list(self.snapshots, "snapshots")

    def value_list(self) -> Tuple[int, ...]:
        return tuple(_int_list(self.values, "values"))

    def dim_list(self) -> Tuple[int, ...]:
        return tuple(_int_list(self.dims, "dims"))

    def burst_count_list(self) -> Tuple[int, ...]:
        return tuple(_int_list(self.burst_counts, "burst_counts"))

    @property
    def out_dir(self) -> Path:
        return Path(self.out)


def _int_list(text: str, key: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"Lista de enteros mal formada en {key}: '{text}'") from None


_CASTS = {f.name: f.type for f in fields(RunConfig)}


def _cast(key: str, raw: str):
    kind = _CASTS[key]
    try:
        if kind in (int, "int"):
            return int(raw)
        if kind in (float, "float"):
            return float(raw)
        if kind in (bool, "bool"):
            if raw.strip().lower() in ("1", "true", "yes", "si", "sí"):
                return True
            if raw.strip().lower() in ("0", "false", "no", ""):
                return False
            raise ValueError(raw)
        if key == "M":
            return int(raw) if raw.strip() else None
        return raw
    except ValueError:
        raise ConfigError(f"Valor inválido para {key}: '{raw}'") from None


def _domain_from_keys(values: Mapping[str, Optional[str]], D: int) -> Optional[ShorteningDomain]:
    kind = (values.get("domain.kind") or "").strip().lower()
    if not kind:
        return None

    def number(key: str) -> Optional[int]:
        raw = (values.get(key) or "").strip()
        if not raw:
            return None
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"Valor inválido para {key}: '{raw}'") from None

    if kind == "empty":
        return Empty()
    if kind == "hyperplane":
        width = number("domain.width")
        if width is None:
            raise ConfigError("domain.width es obligatorio para hyperplane")
        return Hyperplane(width=width, axis=number("domain.axis"))
    if kind == "hypercube":
        z = number("domain.z")
        if z is None:
            raise ConfigError("domain.z es obligatorio para hypercube")
        return Hypercube(z)
    if kind == "explicit":
        try:
            return Explicit(parse_sections(values.get("domain.sections") or "", D))
        except ValueError as e:
            raise ConfigError(str(e)) from None
    raise ConfigError(f"domain.kind desconocido: '{kind}'")


def apply_values(config: RunConfig, values: Mapping[str, Optional[str]]) -> RunConfig:
    """Aplica pares clave=valor (archivo o manifiesto) sobre la configuración"""
    for key, raw in values.items():
        if key.startswith("domain."):
            continue
        if key == "domain":
            continue
        if key not in _CASTS:
            raise ConfigError(f"Clave de configuración desconocida: '{key}'")
        setattr(config, key, _cast(key, raw or ""))
    domain = _domain_from_keys(values, config.D)
    if domain is not None:
        config.domain = domain
    return config


def load_config_file(path: str, config: Optional[RunConfig] = None) -> RunConfig:
    """Lee un archivo clave=valor con python-dotenv"""
    if not Path(path).exists():
        raise ConfigError(f"No existe el archivo de configuración: {path}")
    return apply_values(config or RunConfig(), dotenv_values(path))


def apply_flags(config: RunConfig, flags: Dict[str, object]) -> RunConfig:
    """Los flags con valor distinto de None sobrescriben el archivo"""
    domain_text = flags.pop("domain", None)
    for key, value in flags.items():
        if value is None:
            continue
        if key not in _CASTS:
            raise ConfigError(f"Flag desconocido: '{key}'")
        setattr(config, key, value)
    if domain_text is not None:
        try:
            config.domain = parse_domain(str(domain_text), config.D)
        except ValueError as e:
            raise ConfigError(str(e)) from None
    return config


def _domain_keys(domain: ShorteningDomain) -> Dict[str, str]:
    keys = {"kind": "empty", "axis": "", "width": "", "z": "", "sections": ""}
    if isinstance(domain, Hyperplane):
        keys.update(kind="hyperplane", width=str(domain.width))
        keys["axis"] = "" if domain.axis is None else str(domain.axis)
    elif isinstance(domain, Hypercube):
        keys.update(kind="hypercube", z=str(domain.z))
    elif isinstance(domain, Explicit):
        keys.update(kind="explicit", sections=format_sections(domain.sections))
    return keys


def render_manifest(config: RunConfig) -> str:
    from .export import fmt

    return MANIFEST_TEMPLATE.render(c=config, domain=_domain_keys(config.domain), fmt=fmt)


def write_manifest(config: RunConfig) -> Path:
    """Escribe manifest.txt antes de calcular nada"""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    path = config.out_dir / "manifest.txt"
    path.write_text(render_manifest(config), encoding="utf-8")
    logger.debug(f"Manifiesto escrito en {path}")
    return path
