"""
Evolución de densidad sobre el toro para el canal de borrado binario
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple
import logging

import numpy as np

from .ensemble import Empty, EnsembleParams, ShorteningDomain, domain_size, indicator
from .torus_grid import BACKWARD, FORWARD, GridShape, ScalarField, wrap

logger = logging.getLogger(__name__)

TOL_SUCCESS = 1e-10
TOL_STALL = 1e-12
MAX_ITERS = 50000


class Verdict(str, Enum):
    DECODED = "Decoded"
    STALLED = "Stalled"
    ITER_LIMIT = "IterLimit"


def int_power(x, n: int):
    """x**n por productos repetidos; mantiene la actualización monótona en coma flotante"""
    result = np.ones_like(x) if isinstance(x, np.ndarray) else 1.0
    base = x
    while n > 0:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    return result


@dataclass(frozen=True)
class ErasurePattern:
    """ε base, secciones con ráfaga (ε_i = burst_eps) y dominio acortado (ε_i = 0)"""

    base_eps: float
    bursts: FrozenSet[Tuple[int, ...]] = frozenset()
    domain: ShorteningDomain = Empty()
    burst_eps: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.base_eps <= 1.0:
            raise ValueError(f"ε debe estar en [0, 1] (ε={self.base_eps})")
        if not 0.0 <= self.burst_eps <= 1.0:
            raise ValueError(f"ε de ráfaga debe estar en [0, 1] ({self.burst_eps})")
        object.__setattr__(self, "bursts", frozenset(tuple(b) for b in self.bursts))

    @classmethod
    def build(
        cls,
        base_eps: float,
        shape: GridShape,
        bursts: Iterable[Iterable[int]] = (),
        domain: ShorteningDomain = Empty(),
        burst_eps: float = 1.0,
    ) -> "ErasurePattern":
        """Reduce las coordenadas de ráfaga módulo L antes de construir"""
        wrapped = frozenset(wrap(tuple(b), shape).coords for b in bursts)
        return cls(base_eps, wrapped, domain, burst_eps)

    def with_eps(self, base_eps: float) -> "ErasurePattern":
        return ErasurePattern(base_eps, self.bursts, self.domain, self.burst_eps)

    def validate(self, shape: GridShape) -> None:
        self.domain.validate(shape)
        for coords in self.bursts:
            index = wrap(coords, shape)
            if index.coords != tuple(coords):
                raise ValueError(f"Ráfaga fuera de Z_L^D: {coords}")
            if self.domain.contains(index):
                raise ValueError(
                    f"La sección de ráfaga {coords} pertenece al dominio acortado"
                )

    def materialize(self, shape: GridShape) -> ScalarField:
        """Campo ε_i: 0 en Z, burst_eps en las ráfagas y ε base en el resto"""
        self.validate(shape)
        eps = np.full(shape.dims, float(self.base_eps))
        for coords in self.bursts:
            eps[coords] = self.burst_eps
        eps[indicator(self.domain, shape).values > 0.5] = 0.0
        return ScalarField(shape, eps)


@dataclass(frozen=True)
class DEState:
    params: EnsembleParams
    pattern: ErasurePattern
    eps: ScalarField
    p: ScalarField
    q: ScalarField
    iter: int = 0


@dataclass
class DEOutcome:
    verdict: Verdict
    final_pb: float
    iters_used: int
    residual_delta: float
    final_state: Optional[DEState] = None
    pb_trace: List[Tuple[int, float, float]] = field(default_factory=list)
    snapshots: Dict[int, ScalarField] = field(default_factory=dict)


def init_state(params: EnsembleParams, pattern: ErasurePattern) -> DEState:
    """p^(0) = ε_i; q es un marcador de unos hasta el primer paso"""
    shape = params.shape
    eps = pattern.materialize(shape)
    return DEState(
        params=params,
        pattern=pattern,
        eps=eps,
        p=eps.check_probability(),
        q=ScalarField.constant(shape, 1.0).check_probability(),
        iter=0,
    )


def check_update(state: DEState) -> ScalarField:
    """q_i = 1 - (1 - Σ_j ω_j p_{i-j})^(dr-1), en todas las secciones"""
    s = state.params.window.average(state.p, BACKWARD).values
    q = 1.0 - int_power(1.0 - s, state.params.dr - 1)
    return ScalarField(state.params.shape, q).check_probability()


def bit_update(state: DEState, q: ScalarField) -> ScalarField:
    """p_i = ε_i (Σ_j ω_j q_{i+j})^(dl-1); ε_i = 0 anula p en Z"""
    t = state.params.window.average(q, FORWARD).values
    p = state.eps.values * int_power(t, state.params.dl - 1)
    return ScalarField(state.params.shape, p).check_probability()


def de_step(state: DEState) -> DEState:
    """Un paso Jacobi: q^(ℓ) desde p^(ℓ-1) y luego p^(ℓ) desde q^(ℓ)"""
    q = check_update(state)
    p = bit_update(state, q)
    return DEState(state.params, state.pattern, state.eps, p, q, state.iter + 1)


def decoding_erasure_probability(state: DEState) -> float:
    """P_b = (1/(L^D - #Z)) Σ_i ε_i (Σ_j ω_j q_{i+j})^dl"""
    shape = state.params.shape
    transmitted = shape.size - domain_size(state.pattern.domain, shape)
    if transmitted <= 0:
        raise ValueError("#Z = L^D: no queda ningún bit transmitido")
    t = state.params.window.average(state.q, FORWARD).values
    return float(np.sum(state.eps.values * int_power(t, state.params.dl)) / transmitted)


def geometric_schedule(max_iters: int) -> List[int]:
    """{0, 1, 2, 4, 8, ...} hasta max_iters"""
    schedule = [0]
    it = 1
    while it <= max_iters:
        schedule.append(it)
        it *= 2
    return schedule


def run_de(
    params: EnsembleParams,
    pattern: ErasurePattern,
    max_iters: int = MAX_ITERS,
    tol_success: float = TOL_SUCCESS,
    tol_stall: float = TOL_STALL,
    snapshot_iters: Optional[Iterable[int]] = None,
    keep_trace: bool = False,
) -> DEOutcome:
    """
    Itera de_step hasta que P_b < tol_success (Decoded), hasta que el cambio
    máximo de p entre iteraciones sea < tol_stall con P_b ≥ tol_success
    (Stalled), o hasta agotar max_iters (IterLimit).

    Las instantáneas se guardan en las iteraciones pedidas y siempre en la
    iteración final.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters debe ser ≥ 1 (recibido {max_iters})")
    if tol_success <= 0 or tol_stall <= 0:
        raise ValueError("Las tolerancias deben ser positivas")

    wanted = set(snapshot_iters or ())
    state = init_state(params, pattern)
    pb = decoding_erasure_probability(state)
    outcome = DEOutcome(Verdict.ITER_LIMIT, pb, 0, float("inf"))
    if keep_trace:
        outcome.pb_trace.append((0, pb, float("nan")))
    if 0 in wanted:
        outcome.snapshots[0] = state.p

    if pb < tol_success:
        outcome.verdict = Verdict.DECODED
        outcome.residual_delta = 0.0
        outcome.final_state = state
        outcome.snapshots.setdefault(0, state.p)
        return outcome

    delta = float("inf")
    for _ in range(max_iters):
        new_state = de_step(state)
        delta = float(np.max(np.abs(new_state.p.values - state.p.values)))
        pb = decoding_erasure_probability(new_state)
        state = new_state

        if keep_trace:
            outcome.pb_trace.append((state.iter, pb, delta))
        if state.iter in wanted:
            outcome.snapshots[state.iter] = state.p

        if pb < tol_success:
            outcome.verdict = Verdict.DECODED
            break
        if delta < tol_stall:
            outcome.verdict = Verdict.STALLED
            break

    outcome.final_pb = pb
    outcome.iters_used = state.iter
    outcome.residual_delta = delta
    outcome.final_state = state
    outcome.snapshots.setdefault(state.iter, state.p)
    logger.debug(
        f"DE ε={pattern.base_eps:.12g}: {outcome.verdict.value} en {state.iter} "
        f"iteraciones (P_b={pb:.3e}, Δ={delta:.3e})"
    )
    return outcome
