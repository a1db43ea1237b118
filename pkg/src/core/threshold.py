"""
DE escalar, búsqueda del umbral BP por bisección y cota de ráfaga única
"""

from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Sequence, Tuple
import logging

from .density_evolution import (
    MAX_ITERS,
    TOL_STALL,
    TOL_SUCCESS,
    ErasurePattern,
    Verdict,
    int_power,
    run_de,
)
from .ensemble import EnsembleParams, ShorteningDomain
from .torus_grid import GridShape

logger = logging.getLogger(__name__)

TOL_EPS = 1e-4


class BracketError(ValueError):
    """El intervalo inicial de bisección no separa decodificación de fallo"""

    def __init__(self, message: str, lo_verdict: str, hi_verdict: str):
        super().__init__(f"{message} (lo: {lo_verdict}, hi: {hi_verdict})")
        self.lo_verdict = lo_verdict
        self.hi_verdict = hi_verdict


class BurstBound(str, Enum):
    PROVABLY_UNRECOVERABLE = "ProvablyUnrecoverable"
    BOUND_INCONCLUSIVE = "BoundInconclusive"


@dataclass(frozen=True)
class BisectionSpec:
    lo: float = 0.0
    hi: float = 1.0
    tol_eps: float = TOL_EPS
    max_iters: int = MAX_ITERS
    tol_success: float = TOL_SUCCESS
    tol_stall: float = TOL_STALL

    def __post_init__(self):
        if not 0.0 <= self.lo < self.hi <= 1.0:
            raise ValueError(f"Se requiere 0 ≤ lo < hi ≤ 1 (lo={self.lo}, hi={self.hi})")
        if self.tol_eps <= 0:
            raise ValueError(f"tol_eps debe ser positivo ({self.tol_eps})")


@dataclass
class ThresholdResult:
    eps_star: float
    lo: float
    hi: float
    evaluations: int
    L_used: Optional[int] = None
    unrecoverable: bool = False
    converged: bool = True


# DE escalar (sin acoplamiento)


def _scalar_update(dl: int, dr: int, eps: float, x: float) -> float:
    return eps * int_power(1.0 - int_power(1.0 - x, dr - 1), dl - 1)


def scalar_de_fixed_point(
    dl: int,
    dr: int,
    eps: float,
    tol: float = 1e-12,
    max_iters: int = 200000,
    tol_stall: float = 1e-15,
) -> float:
    """x <- ε(1 - (1 - x)^(dr-1))^(dl-1) desde x = ε; devuelve 0 si decodifica"""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"ε debe estar en [0, 1] (ε={eps})")
    x = eps
    for _ in range(max_iters):
        if x < tol:
            return 0.0
        x_new = _scalar_update(dl, dr, eps, x)
        converged = abs(x_new - x) < tol_stall
        x = x_new
        if converged:
            break
    return 0.0 if x < tol else x


def scalar_de_trajectory(
    dl: int, dr: int, eps: float, iters: int, x0: Optional[float] = None
) -> List[float]:
    """Trayectoria x^(0..iters) de la recursión escalar"""
    x = eps if x0 is None else x0
    trajectory = [x]
    for _ in range(iters):
        x = _scalar_update(dl, dr, eps, x)
        trajectory.append(x)
    return trajectory


def _bisect(decodes: Callable[[float], bool], lo: float, hi: float, tol_eps: float) -> Tuple[float, float, int]:
    evaluations = 0
    while hi - lo > tol_eps:
        mid = 0.5 * (lo + hi)
        evaluations += 1
        if decodes(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi, evaluations


def uncoupled_bp_threshold(
    dl: int, dr: int, tol_eps: float = TOL_EPS, lo: float = 0.0, hi: float = 1.0
) -> ThresholdResult:
    """Umbral BP del ensamble regular (dl, dr) sin acoplar"""
    if dl < 2 or dr <= dl:
        raise ValueError(f"Se requiere dl ≥ 2 y dr > dl (dl={dl}, dr={dr})")

    def decodes(eps: float) -> bool:
        return scalar_de_fixed_point(dl, dr, eps) == 0.0

    lo_ok, hi_ok = decodes(lo), decodes(hi)
    if not lo_ok or hi_ok:
        raise BracketError(
            "Intervalo inválido para el umbral sin acoplar",
            "Decoded" if lo_ok else "Stalled",
            "Decoded" if hi_ok else "Stalled",
        )
    lo, hi, evaluations = _bisect(decodes, lo, hi, tol_eps)
    return ThresholdResult(0.5 * (lo + hi), lo, hi, evaluations + 2)


@lru_cache(maxsize=None)
def _uncoupled_threshold_value(dl: int, dr: int, tol_eps: float) -> float:
    return uncoupled_bp_threshold(dl, dr, tol_eps).eps_star


def coupled_bp_threshold(
    params: EnsembleParams,
    domain: ShorteningDomain,
    bursts: Iterable[Sequence[int]] = (),
    spec: BisectionSpec = BisectionSpec(),
    burst_eps: float = 1.0,
) -> ThresholdResult:
    """
    Bisección sobre el ε base; las ráfagas quedan fijas en burst_eps. Si ni
    siquiera ε = lo = 0 decodifica, devuelve eps_star = 0 con la marca
    `unrecoverable`.
    """
    base = ErasurePattern.build(0.0, params.shape, bursts, domain, burst_eps)
    base.validate(params.shape)

    def verdict(eps: float) -> Verdict:
        outcome = run_de(
            params,
            base.with_eps(eps),
            max_iters=spec.max_iters,
            tol_success=spec.tol_success,
            tol_stall=spec.tol_stall,
        )
        logger.debug(f"  bisección ε={eps:.6f} -> {outcome.verdict.value}")
        return outcome.verdict

    lo_verdict = verdict(spec.lo)
    if lo_verdict != Verdict.DECODED:
        if spec.lo == 0.0:
            logger.info("La ráfaga no se recupera ni siquiera con ε = 0")
            return ThresholdResult(0.0, 0.0, 0.0, 1, params.L, unrecoverable=True)
        raise BracketError("El extremo inferior no decodifica", lo_verdict.value, "-")
    hi_verdict = verdict(spec.hi)
    if hi_verdict == Verdict.DECODED:
        raise BracketError("El extremo superior decodifica", lo_verdict.value, hi_verdict.value)

    lo, hi, evaluations = _bisect(
        lambda eps: verdict(eps) == Verdict.DECODED, spec.lo, spec.hi, spec.tol_eps
    )
    return ThresholdResult(0.5 * (lo + hi), lo, hi, evaluations + 2, params.L)


def coupled_threshold_auto_L(
    params: EnsembleParams,
    domain_for: Callable[[GridShape], ShorteningDomain],
    bursts_for: Callable[[GridShape, ShorteningDomain], List[Tuple[int, ...]]],
    burst_count: int = 0,
    spec: BisectionSpec = BisectionSpec(),
    l_max: int = 512,
    L_start: Optional[int] = None,
    burst_eps: float = 1.0,
) -> ThresholdResult:
    """
    Duplica L desde 4·w·(ráfagas + 1) hasta que eps_star cambie menos de
    tol_eps entre dos tamaños consecutivos, o hasta superar l_max.
    """
    L = L_start or 4 * params.w * (burst_count + 1)
    L = max(L, params.w + 1)
    previous: Optional[ThresholdResult] = None
    while True:
        current_params = params.with_(L=L)
        domain = domain_for(current_params.shape)
        bursts = bursts_for(current_params.shape, domain)
        result = coupled_bp_threshold(current_params, domain, bursts, spec, burst_eps)
        logger.debug(f"  L={L}: ε*={result.eps_star:.6f}")
        if previous is not None and abs(result.eps_star - previous.eps_star) < spec.tol_eps:
            return result
        previous = result
        if 2 * L > l_max:
            logger.warning(f"ε* no convergió antes de L={L} (l_max={l_max})")
            return replace(result, converged=False)
        L *= 2


def single_burst_bound(
    dl: int, dr: int, w: int, D: int, eps_burst: float, tol_eps: float = TOL_EPS
) -> BurstBound:
    """
    Una ráfaga única es irrecuperable si ε_burst > ε^BP(dl, dr)·w^D. La cota
    va en una sola dirección: en otro caso no se concluye nada.
    """
    if w < 1 or D < 1:
        raise ValueError(f"Se requiere w ≥ 1 y D ≥ 1 (w={w}, D={D})")
    if not 0.0 <= eps_burst <= 1.0:
        raise ValueError(f"ε de ráfaga debe estar en [0, 1] ({eps_burst})")
    eps_bp = _uncoupled_threshold_value(dl, dr, tol_eps)
    if eps_burst > eps_bp * w**D:
        return BurstBound.PROVABLY_UNRECOVERABLE
    return BurstBound.BOUND_INCONCLUSIVE
