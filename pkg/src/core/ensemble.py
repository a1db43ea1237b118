"""
Parámetros del ensamble MD-SC, dominios de acortamiento y cálculo de tasas
"""

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Tuple, Union
import logging

import numpy as np

from .torus_grid import BACKWARD, GridShape, ScalarField, TorusIndex, box_window_sum, wrap

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EnsembleParams:
    """Tupla (dl, dr, L, D, w) del ensamble; M solo es informativo"""

    dl: int
    dr: int
    L: int
    D: int = 1
    w: int = 2
    M: Optional[int] = None

    def __post_init__(self):
        if self.dl < 3:
            raise ValueError(
                f"Se requiere grado de nodo de bit dl ≥ 3 (recibido dl={self.dl})"
            )
        if self.dr <= self.dl:
            raise ValueError(
                f"Se requiere grado de nodo de check dr > dl (dl={self.dl}, dr={self.dr})"
            )
        if self.w < 1:
            raise ValueError(f"La ventana de acoplamiento debe cumplir w ≥ 1 (w={self.w})")
        if self.L <= self.w:
            raise ValueError(
                f"Se requiere número de acoplamiento L > w (L={self.L}, w={self.w})"
            )
        if self.M is not None and self.M < 1:
            raise ValueError(f"M debe ser positivo (M={self.M})")
        GridShape(self.D, self.L)

    @property
    def shape(self) -> GridShape:
        return GridShape(self.D, self.L)

    @property
    def window(self) -> "CouplingWindow":
        return CouplingWindow(self.w, self.D)

    def with_(self, **changes) -> "EnsembleParams":
        values = {
            "dl": self.dl,
            "dr": self.dr,
            "L": self.L,
            "D": self.D,
            "w": self.w,
            "M": self.M,
        }
        values.update(changes)
        return EnsembleParams(**values)


@dataclass(frozen=True)
class CouplingWindow:
    """Pesos uniformes ω_j = 1/w^D sobre j ∈ [0, w-1]^D"""

    w: int
    D: int

    def weight(self, offset: Iterable[int]) -> float:
        offset = tuple(offset)
        if len(offset) == self.D and all(0 <= j < self.w for j in offset):
            return 1.0 / self.w**self.D
        return 0.0

    def average(self, field: ScalarField, direction: str) -> ScalarField:
        """Σ_j ω_j f(i ± j) sobre todo el toro"""
        if field.shape.D != self.D:
            raise ValueError(f"El campo tiene D={field.shape.D} pero la ventana D={self.D}")
        return box_window_sum(field, self.w, direction)


# Dominios de acortamiento


@dataclass(frozen=True)
class Empty:
    def contains(self, index: TorusIndex) -> bool:
        return False

    def validate(self, shape: GridShape) -> None:
        pass


@dataclass(frozen=True)
class Hyperplane:
    """{i : i[axis] ∈ [0, width-1]}; axis=None equivale al último eje"""

    width: int
    axis: Optional[int] = None

    def axis_for(self, shape: GridShape) -> int:
        return shape.D - 1 if self.axis is None else self.axis

    def contains(self, index: TorusIndex) -> bool:
        axis = len(index.coords) - 1 if self.axis is None else self.axis
        return index.coords[axis] < self.width

    def validate(self, shape: GridShape) -> None:
        axis = self.axis_for(shape)
        if not 0 <= axis < shape.D:
            raise ValueError(f"Eje de hiperplano fuera de rango: {axis} (D={shape.D})")
        if not 1 <= self.width < shape.L:
            raise ValueError(
                f"El ancho del hiperplano debe cumplir 1 ≤ ancho < L "
                f"(ancho={self.width}, L={shape.L})"
            )


@dataclass(frozen=True)
class Hypercube:
    """[0, z-1]^D"""

    z: int

    def contains(self, index: TorusIndex) -> bool:
        return all(c < self.z for c in index.coords)

    def validate(self, shape: GridShape) -> None:
        if not 1 <= self.z < shape.L:
            raise ValueError(
                f"El hipercubo debe cumplir 1 ≤ z < L (z={self.z}, L={shape.L})"
            )


@dataclass(frozen=True)
class Explicit:
    sections: FrozenSet[Tuple[int, ...]] = field(default_factory=frozenset)

    def contains(self, index: TorusIndex) -> bool:
        return index.coords in self.sections

    def validate(self, shape: GridShape) -> None:
        for coords in self.sections:
            if len(coords) != shape.D or any(not 0 <= c < shape.L for c in coords):
                raise ValueError(
                    f"Sección fuera de Z_L^D en dominio explícito: {coords} "
                    f"(D={shape.D}, L={shape.L})"
                )


ShorteningDomain = Union[Empty, Hyperplane, Hypercube, Explicit]


def explicit(sections: Iterable[Iterable[int]], shape: GridShape) -> Explicit:
    """Construye un dominio explícito reduciendo cada índice módulo L"""
    return Explicit(frozenset(wrap(tuple(s), shape).coords for s in sections))


def domain_size(domain: ShorteningDomain, shape: GridShape) -> int:
    """#Z"""
    domain.validate(shape)
    if isinstance(domain, Empty):
        return 0
    if isinstance(domain, Hyperplane):
        return domain.width * shape.L ** (shape.D - 1)
    if isinstance(domain, Hypercube):
        return domain.z**shape.D
    return len(domain.sections)


def indicator(domain: ShorteningDomain, shape: GridShape) -> ScalarField:
    """Campo {0,1} que vale 1 exactamente en Z"""
    domain.validate(shape)
    mask = np.zeros(shape.dims)
    if isinstance(domain, Hyperplane):
        index = [slice(None)] * shape.D
        index[domain.axis_for(shape)] = slice(0, domain.width)
        mask[tuple(index)] = 1.0
    elif isinstance(domain, Hypercube):
        mask[(slice(0, domain.z),) * shape.D] = 1.0
    elif isinstance(domain, Explicit):
        for coords in domain.sections:
            mask[coords] = 1.0
    return ScalarField(shape, mask)


def members(domain: ShorteningDomain, shape: GridShape) -> np.ndarray:
    """Coordenadas de las secciones de Z, una fila por sección"""
    return np.argwhere(indicator(domain, shape).values > 0.5)


def parse_domain(text: str, D: int) -> ShorteningDomain:
    """
    Interpreta la sintaxis `<kind:args>` de la línea de comandos:

        empty
        hyperplane:width=4[,axis=0]
        hypercube:z=15
        explicit:0;1;100          (1D)
        explicit:0,0;0,1          (tuplas separadas por ';')
    """
    kind, _, args = text.strip().partition(":")
    kind = kind.strip().lower()
    if kind == "empty":
        return Empty()
    if kind == "explicit":
        return Explicit(frozenset(parse_sections(args, D)))

    options: Dict[str, int] = {}
    for item in filter(None, (a.strip() for a in args.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ValueError(f"Argumento de dominio mal formado: '{item}'")
        try:
            options[key.strip()] = int(value)
        except ValueError:
            raise ValueError(f"Valor no entero en dominio: '{item}'") from None

    if kind == "hyperplane":
        if "width" not in options:
            raise ValueError("El dominio hyperplane requiere width=<ancho>")
        return Hyperplane(width=options["width"], axis=options.get("axis"))
    if kind == "hypercube":
        if "z" not in options:
            raise ValueError("El dominio hypercube requiere z=<tamaño>")
        return Hypercube(z=options["z"])
    raise ValueError(f"Tipo de dominio desconocido: '{kind}'")


def parse_sections(text: str, D: int) -> FrozenSet[Tuple[int, ...]]:
    """'i1,i2;j1,j2;...' -> conjunto de tuplas de D enteros"""
    sections = set()
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        try:
            coords = tuple(int(c) for c in chunk.split(","))
        except ValueError:
            raise ValueError(f"Coordenada de sección mal formada: '{chunk}'") from None
        if len(coords) != D:
            raise ValueError(
                f"La sección '{chunk}' tiene {len(coords)} coordenadas pero D={D}"
            )
        sections.add(coords)
    return frozenset(sections)


def format_sections(sections: Iterable[Tuple[int, ...]]) -> str:
    return ";".join(",".join(str(c) for c in s) for s in sorted(sections))


def format_domain(domain: ShorteningDomain) -> str:
    if isinstance(domain, Hyperplane):
        axis = "" if domain.axis is None else f",axis={domain.axis}"
        return f"hyperplane:width={domain.width}{axis}"
    if isinstance(domain, Hypercube):
        return f"hypercube:z={domain.z}"
    if isinstance(domain, Explicit):
        return f"explicit:{format_sections(domain.sections)}"
    return "empty"


# Tasas


@dataclass(frozen=True)
class RateCounts:
    """Conteos del argumento de la tasa: C checks válidos y V bits transmitidos"""

    M: int
    check_nodes: float
    bit_nodes: int

    @property
    def rate(self) -> float:
        return 1.0 - self.check_nodes / self.bit_nodes


def _shortened_fraction(params: EnsembleParams, domain: ShorteningDomain) -> ScalarField:
    """Σ_{j: i+j ∈ Z} ω_j para cada sección, vía la suma de ventana del indicador"""
    return params.window.average(indicator(domain, params.shape), BACKWARD)


def _active_check_sections(params: EnsembleParams, domain: ShorteningDomain) -> float:
    fraction = _shortened_fraction(params, domain).values
    return float(np.sum(1.0 - fraction**params.dr))


def _transmitted_sections(params: EnsembleParams, domain: ShorteningDomain) -> int:
    transmitted = params.shape.size - domain_size(domain, params.shape)
    if transmitted <= 0:
        raise ValueError("#Z = L^D: no queda ningún bit transmitido")
    return transmitted


def design_rate(params: EnsembleParams, domain: ShorteningDomain) -> float:
    """
    R = 1 - (dl/dr) · (1/(L^D - #Z)) · Σ_i [1 - (Σ_{j: i+j∈Z} ω_j)^dr]
    """
    transmitted = _transmitted_sections(params, domain)
    active = _active_check_sections(params, domain)
    rate = 1.0 - (params.dl / params.dr) * (active / transmitted)
    logger.debug(f"Tasa de diseño {rate:.12g} para {format_domain(domain)}")
    return rate


def rate_counts(params: EnsembleParams, domain: ShorteningDomain, M: Optional[int] = None) -> RateCounts:
    """V = M·(L^D - #Z) y C = (dl/dr)·M·Σ_i[1 - (...)^dr]"""
    M = M or params.M or 1
    transmitted = _transmitted_sections(params, domain)
    active = _active_check_sections(params, domain)
    return RateCounts(
        M=M,
        check_nodes=(params.dl / params.dr) * M * active,
        bit_nodes=M * transmitted,
    )


def rateloss(params: EnsembleParams, domain: ShorteningDomain) -> float:
    return (1.0 - params.dl / params.dr) - design_rate(params, domain)


@dataclass
class ClosedFormRates:
    """Variantes de la fórmula cerrada 1D frente a la tasa de diseño directa"""

    design: float
    variants: Dict[str, float]
    matching: Tuple[str, ...]


def closed_form_rate_1d(params: EnsembleParams, tol: float = 1e-12) -> ClosedFormRates:
    """
    Evalúa (1 - dl/dr) - (dl/dr)·N/(L - w) con tres numeradores:

        printed:              1 - w - 2Σ_{i=0}^{w} (i/w)^dr
        sign_corrected:       w + 1 - 2Σ_{i=0}^{w} (i/w)^dr
        sign_corrected_w_1:   w + 1 - 2Σ_{i=0}^{w-1} (i/w)^dr

    y señala cuáles coinciden con design_rate para Z = [0, w-1].
    """
    if params.D != 1:
        raise ValueError(f"La fórmula cerrada solo aplica a D=1 (D={params.D})")
    dl, dr, L, w = params.dl, params.dr, params.L, params.w
    ratio = dl / dr
    full = sum((i / w) ** dr for i in range(w + 1))
    short = sum((i / w) ** dr for i in range(w))
    numerators = {
        "printed": 1 - w - 2 * full,
        "sign_corrected": w + 1 - 2 * full,
        "sign_corrected_w_1": w + 1 - 2 * short,
    }
    variants = {name: (1 - ratio) - ratio * n / (L - w) for name, n in numerators.items()}
    design = design_rate(params, Hyperplane(width=w, axis=0))
    matching = tuple(name for name, value in variants.items() if abs(value - design) <= tol)
    if not matching:
        logger.warning(f"Ninguna variante cerrada coincide con la tasa directa (L={L}, w={w})")
    return ClosedFormRates(design=design, variants=variants, matching=matching)


def hypercube_rate_bound(params: EnsembleParams, z: int) -> float:
    """R ≥ 1 - (dl/dr) · L^D / (L^D - z^D)"""
    if z < 0 or z >= params.L:
        raise ValueError(f"El hipercubo debe cumplir 0 ≤ z < L (z={z}, L={params.L})")
    total = params.L**params.D
    return 1.0 - (params.dl / params.dr) * total / (total - z**params.D)


@dataclass
class SectionCountComparison:
    """Pérdida de tasa a igual número total de secciones L_C"""

    sections: int
    chain_rateloss: float
    torus_rateloss: float


def equal_section_comparison(dl: int, dr: int, w: int, L: int, D: int, z: int) -> SectionCountComparison:
    """
    Compara un toro D-dimensional con hipercubo de lado z y L^D secciones
    contra una cadena 1D de L_C = L^D secciones acortada en [0, w-1].
    """
    torus = EnsembleParams(dl, dr, L, D, w)
    sections = L**D
    chain = EnsembleParams(dl, dr, sections, 1, w)
    return SectionCountComparison(
        sections=sections,
        chain_rateloss=rateloss(chain, Hyperplane(width=w, axis=0)),
        torus_rateloss=rateloss(torus, Hypercube(z)),
    )
