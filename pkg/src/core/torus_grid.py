"""
Geometría del toro discreto Z_L^D y campos escalares densos sobre él
"""

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple
import logging

import numpy as np

logger = logging.getLogger(__name__)

FORWARD = "forward"
BACKWARD = "backward"


@dataclass(frozen=True)
class GridShape:
    """Dimensión D y número de secciones L por eje"""

    D: int
    L: int

    def __post_init__(self):
        if self.D < 1:
            raise ValueError(f"La dimensión D debe ser ≥ 1 (recibido D={self.D})")
        if self.L < 1:
            raise ValueError(f"El número de secciones L debe ser ≥ 1 (recibido L={self.L})")
        if self.L**self.D > np.iinfo(np.intp).max:
            raise ValueError(f"L^D = {self.L}^{self.D} no cabe en un entero nativo")

    @property
    def size(self) -> int:
        return self.L**self.D

    @property
    def dims(self) -> Tuple[int, ...]:
        return (self.L,) * self.D


@dataclass(frozen=True)
class TorusIndex:
    """Índice de sección en Z_L^D, con coordenadas ya reducidas a [0, L-1]"""

    coords: Tuple[int, ...]


def wrap(raw_coords: Sequence[int], shape: GridShape) -> TorusIndex:
    """Reduce cada coordenada módulo L"""
    if len(raw_coords) != shape.D:
        raise ValueError(
            f"El índice tiene {len(raw_coords)} coordenadas pero D={shape.D}"
        )
    return TorusIndex(tuple(int(c) % shape.L for c in raw_coords))


def torus_distance(a: TorusIndex, b: TorusIndex, shape: GridShape) -> int:
    """Distancia L∞ sobre el toro"""
    best = 0
    for x, y in zip(a.coords, b.coords):
        d = abs(x - y) % shape.L
        best = max(best, min(d, shape.L - d))
    return best


@dataclass(frozen=True)
class ScalarField:
    """
    Función real sobre Z_L^D. `values` es un array de forma (L,)*D en orden C,
    de modo que `values.ravel()` sigue el aplanado row-major documentado.
    """

    shape: GridShape
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size != self.shape.size:
            raise ValueError(
                f"El campo tiene {values.size} valores pero L^D = {self.shape.size}"
            )
        values = values.reshape(self.shape.dims)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, shape: GridShape, value: float) -> "ScalarField":
        return cls(shape, np.full(shape.dims, float(value)))

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def __getitem__(self, index: TorusIndex) -> float:
        return float(self.values[index.coords])

    def mean(self) -> float:
        return float(self.values.mean())

    def check_probability(self) -> "ScalarField":
        """Verifica (solo en modo debug) que todos los valores estén en [0, 1]"""
        if __debug__:
            assert np.all(self.values >= 0.0) and np.all(
                self.values <= 1.0
            ), "Campo de probabilidad fuera de [0, 1]"
        return self


def box_window_sum(field: ScalarField, w: int, direction: str = FORWARD) -> ScalarField:
    """
    Promedio sobre la ventana [0, w-1]^D con pesos 1/w^D.

    forward:  salida_i = (1/w^D) Σ_j f(i + j)
    backward: salida_i = (1/w^D) Σ_j f(i - j)

    El núcleo es separable, así que se aplica eje por eje. Cada promedio 1D se
    suma directamente sobre los w desplazamientos en orden j = 0..w-1.
    """
    L = field.shape.L
    if w < 1 or w > L:
        raise ValueError(f"La ventana debe cumplir 1 ≤ w ≤ L (w={w}, L={L})")
    if direction not in (FORWARD, BACKWARD):
        raise ValueError(f"Dirección desconocida: {direction}")
    if w == 1:
        return field

    sign = -1 if direction == FORWARD else 1
    values = field.values
    for axis in range(field.shape.D):
        acc = values.copy()
        for j in range(1, w):
            # np.roll(x, -j)[i] == x[i + j]
            acc += np.roll(values, sign * j, axis=axis)
        values = acc / w
    return ScalarField(field.shape, values)


def naive_box_window_sum(field: ScalarField, w: int, direction: str = FORWARD) -> ScalarField:
    """Evaluación directa O(w^D · L^D), usada como referencia en los tests"""
    shape = field.shape
    sign = 1 if direction == FORWARD else -1
    out = np.zeros(shape.dims)
    offsets = np.ndindex(*((w,) * shape.D))
    for offset in offsets:
        shift = tuple(-sign * o for o in offset)
        out += np.roll(field.values, shift, axis=tuple(range(shape.D)))
    return ScalarField(shape, out / w**shape.D)


def reflect(field: ScalarField) -> ScalarField:
    """f(i) -> f(-i)"""
    values = field.values
    for axis in range(field.shape.D):
        values = np.roll(np.flip(values, axis=axis), 1, axis=axis)
    return ScalarField(field.shape, values)


def translate(field: ScalarField, offset: Iterable[int]) -> ScalarField:
    """Traslación sobre el toro: salida(i + t) = f(i)"""
    offset = tuple(offset)
    return ScalarField(
        field.shape,
        np.roll(field.values, offset, axis=tuple(range(field.shape.D))),
    )
