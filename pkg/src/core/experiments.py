"""
Experimentos: equivalencia con el sistema 1D, perfiles de ráfaga, barridos de
umbral y secuencias de instantáneas 2D
"""

from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np
from tqdm import tqdm

from .density_evolution import (
    DEOutcome,
    ErasurePattern,
    Verdict,
    de_step,
    init_state,
    run_de,
)
from .ensemble import (
    Empty,
    EnsembleParams,
    Hypercube,
    Hyperplane,
    ShorteningDomain,
    members,
)
from .logging_config import log_performance
from .threshold import BisectionSpec, ThresholdResult, coupled_threshold_auto_L
from .torus_grid import GridShape, ScalarField, TorusIndex
from ..utils.export import write_field_csv, write_field_pgm

logger = logging.getLogger(__name__)

# Iteraciones de las secuencias de 12 cuadros; el último cuadro es la iteración final
FIGURE_SCHEDULE = [0, 1, 2, 4, 8, 16, 32, 64, 128, 256, 512]
MIN_BURST_DISTANCE = 10
DECODED_SECTION = 1e-6
STALL_FRONT_FRACTION = 0.5


# Colocación de ráfagas


def _distances(points: np.ndarray, candidate: np.ndarray, L: int) -> np.ndarray:
    """Distancia L∞ sobre el toro de cada fila de `points` a `candidate`"""
    d = np.abs(points - candidate) % L
    return np.minimum(d, L - d).max(axis=1)


def spread_bursts(shape: GridShape, domain: ShorteningDomain, count: int) -> List[Tuple[int, ...]]:
    """
    Coloca `count` ráfagas equiespaciadas junto con Z: a lo largo del eje
    acortado para un hiperplano, de la diagonal para un hipercubo y de la
    diagonal completa en otro caso. En los ejes libres del hiperplano las
    ráfagas se reparten también de forma uniforme.
    """
    if count == 0:
        return []
    L, D = shape.L, shape.D
    bursts = []
    for k in range(count):
        if isinstance(domain, Hyperplane):
            t = domain.width
            along = (t - 1) + int(round((k + 1) * (L - t + 1) / (count + 1)))
            coords = [int(round(k * L / count)) % L] * D
            coords[domain.axis_for(shape)] = along % L
        elif isinstance(domain, Hypercube):
            z = domain.z
            coords = [((z - 1) + int(round((k + 1) * (L - z + 1) / (count + 1)))) % L] * D
        else:
            coords = [int(round((k + 0.5) * L / count)) % L] * D
        bursts.append(tuple(coords))

    if len(set(bursts)) != count or any(_in_domain(domain, shape, b) for b in bursts):
        raise ValueError(f"No caben {count} ráfagas separadas con L={L}")
    return bursts


def _in_domain(domain: ShorteningDomain, shape: GridShape, coords: Tuple[int, ...]) -> bool:
    return domain.contains(TorusIndex(coords))


def place_random_bursts(
    shape: GridShape,
    domain: ShorteningDomain,
    count: int,
    seed: int,
    min_distance: int = MIN_BURST_DISTANCE,
    max_attempts: int = 100000,
    allow_fewer: bool = False,
) -> List[Tuple[int, ...]]:
    """
    Colocación uniforme con semilla, con distancia L∞ mínima `min_distance`
    entre ráfagas y respecto de Z. Con la misma semilla la secuencia es
    idéntica, y las primeras n ráfagas de una colocación de tamaño m > n
    coinciden con las de tamaño n. Con `allow_fewer` se devuelven las que
    quepan en lugar de fallar.
    """
    rng = np.random.default_rng(seed)
    shortened = members(domain, shape)
    placed: List[np.ndarray] = []
    attempts = 0
    while len(placed) < count:
        attempts += 1
        if attempts > max_attempts:
            if allow_fewer:
                break
            raise ValueError(
                f"No se pudieron colocar {count} ráfagas con separación {min_distance} "
                f"(L={shape.L}, colocadas {len(placed)})"
            )
        candidate = rng.integers(0, shape.L, size=shape.D)
        if len(shortened) and _distances(shortened, candidate, shape.L).min() < min_distance:
            continue
        if placed and _distances(np.array(placed), candidate, shape.L).min() < min_distance:
            continue
        placed.append(candidate)
    return [tuple(int(c) for c in b) for b in placed]


# Equivalencia hiperplano <-> sistema 1D


def hyperplane_equivalence_check(
    params: EnsembleParams, eps: float, iters: int, axis: Optional[int] = None
) -> float:
    """
    Ejecuta la DE D-dimensional con Z = hiperplano de ancho w y la DE 1D con
    Z = [0, w-1] en paralelo; devuelve max_{ℓ,i} |p_i^(ℓ) - p̃_{i[axis]}^(ℓ)|.
    """
    if params.D < 2:
        raise ValueError(f"La comprobación requiere D ≥ 2 (D={params.D})")
    axis = params.D - 1 if axis is None else axis
    plane = Hyperplane(width=params.w, axis=axis)
    chain_params = params.with_(D=1)
    chain = Hyperplane(width=params.w, axis=0)

    state = init_state(params, ErasurePattern(eps, domain=plane))
    chain_state = init_state(chain_params, ErasurePattern(eps, domain=chain))
    view = [1] * params.D
    view[axis] = params.L

    deviation = 0.0
    for step in range(iters + 1):
        if step:
            state = de_step(state)
            chain_state = de_step(chain_state)
        image = chain_state.p.values.reshape(view)
        deviation = max(deviation, float(np.max(np.abs(state.p.values - image))))
    logger.debug(f"Desviación máxima hiperplano/1D: {deviation:.3e}")
    return deviation


# Perfil de ráfagas 1D


@dataclass
class BurstProfile:
    outcome: DEOutcome
    snapshots: Dict[int, np.ndarray]
    argmax_sections: List[int]
    stall_edges: List[int]


def stall_edges(
    p: np.ndarray,
    domain: ShorteningDomain,
    shape: GridShape,
    decoded_below: float = DECODED_SECTION,
    front_fraction: float = STALL_FRONT_FRACTION,
) -> List[int]:
    """
    Frentes de parada al recorrer el toro 1D desde Z hacia ambos lados: la
    primera sección cuyo p alcanza `front_fraction` veces la mediana de la
    meseta residual (secciones con p ≥ decoded_below). La cola exponencial
    delante del frente no cuenta. Vacío si todo el anillo está decodificado.
    """
    if shape.D != 1:
        raise ValueError("stall_edges solo aplica a D=1")
    L = shape.L
    residual = p[p >= decoded_below]
    if residual.size == 0:
        return []
    decoded = p < front_fraction * float(np.median(residual))
    start = int(members(domain, shape)[0][0]) if not isinstance(domain, Empty) else int(np.argmin(p))
    edges = []
    for step in (1, -1):
        i = start
        for _ in range(L):
            i = (i + step) % L
            if not decoded[i]:
                edges.append(i)
                break
    return edges


def burst_profile_1d(
    params: EnsembleParams,
    domain: ShorteningDomain,
    bursts: Iterable[Sequence[int]],
    eps: float,
    snapshot_iters: Optional[Iterable[int]] = None,
    max_iters: int = 50000,
    tol_success: float = 1e-10,
    tol_stall: float = 1e-12,
) -> BurstProfile:
    """Perfil p_i^(ℓ) en las iteraciones pedidas, veredicto y dónde se detuvo"""
    if params.D != 1:
        raise ValueError(f"El perfil de ráfagas requiere D=1 (D={params.D})")
    pattern = ErasurePattern.build(eps, params.shape, [tuple(b) for b in bursts], domain)
    outcome = run_de(
        params,
        pattern,
        max_iters=max_iters,
        tol_success=tol_success,
        tol_stall=tol_stall,
        snapshot_iters=snapshot_iters,
    )
    final = outcome.final_state.p.values
    peak = final.max()
    argmax = [int(i) for i in np.flatnonzero(final == peak)] if peak > 0 else []
    return BurstProfile(
        outcome=outcome,
        snapshots={it: f.values.copy() for it, f in sorted(outcome.snapshots.items())},
        argmax_sections=argmax,
        stall_edges=stall_edges(final, domain, params.shape),
    )


# Barridos de umbral


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: Tuple[int, ...]
    base: EnsembleParams
    dims: Tuple[int, ...] = (1, 2)
    burst_counts: Tuple[int, ...] = (0,)
    placement: str = "spread"
    seed: int = 0
    min_distance: int = MIN_BURST_DISTANCE
    bisection: BisectionSpec = BisectionSpec()
    l_max: int = 512

    def __post_init__(self):
        if self.variable not in ("window_w", "hypercube_z", "burst_count"):
            raise ValueError(f"Variable de barrido desconocida: {self.variable}")
        if not self.values:
            raise ValueError("La lista de valores del barrido está vacía")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("Los valores del barrido deben ser estrictamente crecientes")
        if self.placement not in ("spread", "random"):
            raise ValueError(f"Política de colocación desconocida: {self.placement}")


@dataclass
class SweepCell:
    kind: str
    D: int
    w: int
    size: int
    bursts: int
    base: EnsembleParams
    bisection: BisectionSpec
    placement: str
    seed: int
    min_distance: int
    l_max: int


@dataclass
class SweepRow:
    D: int
    w_or_z: int
    bursts: int
    coupled_sections: int
    L_used: Optional[int] = None
    eps_star: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    evaluations: Optional[int] = None
    seed: int = 0
    converged: bool = True
    error: str = ""


def _run_cell(cell: SweepCell) -> SweepRow:
    """Celda independiente del barrido; los errores quedan en la fila"""
    row = SweepRow(
        D=cell.D,
        w_or_z=cell.size,
        bursts=cell.bursts,
        coupled_sections=cell.w**cell.D,
        seed=cell.seed,
    )

    def domain_for(shape: GridShape) -> ShorteningDomain:
        if cell.kind == "hypercube":
            return Hypercube(cell.size)
        return Hyperplane(width=cell.w)

    def bursts_for(shape: GridShape, domain: ShorteningDomain):
        if cell.placement == "random":
            return place_random_bursts(shape, domain, cell.bursts, cell.seed, cell.min_distance)
        return spread_bursts(shape, domain, cell.bursts)

    start = 4 * cell.w * (cell.bursts + 1)
    if cell.kind == "hypercube":
        start = max(start, 2 * cell.size)
    try:
        params = cell.base.with_(D=cell.D, w=cell.w, L=max(start, cell.w + 1))
        result: ThresholdResult = coupled_threshold_auto_L(
            params,
            domain_for,
            bursts_for,
            burst_count=cell.bursts,
            spec=cell.bisection,
            l_max=cell.l_max,
            L_start=start,
        )
        row.L_used = result.L_used
        row.eps_star = result.eps_star
        row.lo = result.lo
        row.hi = result.hi
        row.evaluations = result.evaluations
        row.converged = result.converged
    except Exception as e:
        row.error = str(e)
    return row


def _run_cells(cells: List[SweepCell], jobs: int = 1, progress: bool = True) -> List[SweepRow]:
    if jobs > 1:
        with Pool(jobs) as pool:
            rows = list(
                tqdm(pool.imap(_run_cell, cells), total=len(cells), disable=not progress)
            )
    else:
        rows = [_run_cell(c) for c in tqdm(cells, disable=not progress)]
    for row in rows:
        if row.error:
            logger.warning(
                f"Celda D={row.D} valor={row.w_or_z} ráfagas={row.bursts} falló: {row.error}"
            )
    return rows


@log_performance
def threshold_vs_window_sweep(
    base: EnsembleParams,
    dims: Sequence[int],
    burst_counts: Sequence[int],
    windows: Sequence[int],
    bisection: BisectionSpec = BisectionSpec(),
    l_max: int = 512,
    placement: str = "spread",
    seed: int = 0,
    min_distance: int = MIN_BURST_DISTANCE,
    jobs: int = 1,
    progress: bool = True,
) -> List[SweepRow]:
    """Umbral BP frente a w para cada (D, ráfagas) con Z = hiperplano de ancho w"""
    cells = [
        SweepCell("hyperplane", D, w, w, b, base, bisection, placement, seed, min_distance, l_max)
        for D in dims
        for b in burst_counts
        for w in windows
    ]
    rows = _run_cells(cells, jobs, progress)
    return sorted(rows, key=lambda r: (r.coupled_sections, r.D, r.bursts))


@log_performance
def threshold_vs_hypercube_sweep(
    base: EnsembleParams,
    z_values: Sequence[int],
    dims: Optional[Sequence[int]] = None,
    burst_counts: Sequence[int] = (0,),
    bisection: BisectionSpec = BisectionSpec(),
    l_max: int = 512,
    placement: str = "spread",
    seed: int = 0,
    min_distance: int = MIN_BURST_DISTANCE,
    jobs: int = 1,
    progress: bool = True,
) -> List[SweepRow]:
    """
    Umbral BP frente al lado z del hipercubo acortado para cada (D, ráfagas).
    Sin `dims` se usa la dimensión de `base`.
    """
    dims = (base.D,) if dims is None else tuple(dims)
    cells = [
        SweepCell("hypercube", D, base.w, z, b, base, bisection, placement, seed, min_distance, l_max)
        for D in dims
        for b in burst_counts
        for z in z_values
    ]
    rows = _run_cells(cells, jobs, progress)
    for D in dims:
        for b in burst_counts:
            series = [r for r in rows if r.D == D and r.bursts == b]
            if not is_non_decreasing(series, bisection.tol_eps):
                logger.warning(f"ε*(z) no es no decreciente en z (D={D}, ráfagas={b})")
    return rows


def is_non_decreasing(rows: Sequence[SweepRow], slack: float = 0.0) -> bool:
    values = [r.eps_star for r in rows if r.eps_star is not None]
    return all(b >= a - slack for a, b in zip(values, values[1:]))


def run_sweep(spec: SweepSpec, jobs: int = 1, progress: bool = True) -> List[SweepRow]:
    common = dict(
        bisection=spec.bisection,
        l_max=spec.l_max,
        placement=spec.placement,
        seed=spec.seed,
        min_distance=spec.min_distance,
        jobs=jobs,
        progress=progress,
    )
    if spec.variable == "window_w":
        return threshold_vs_window_sweep(spec.base, spec.dims, spec.burst_counts, spec.values, **common)
    if spec.variable == "hypercube_z":
        return threshold_vs_hypercube_sweep(spec.base, spec.values, spec.dims, spec.burst_counts, **common)
    return threshold_vs_window_sweep(spec.base, spec.dims, spec.values, (spec.base.w,), **common)


# Secuencias 2D


@dataclass
class SnapshotRun:
    outcome: DEOutcome
    frames: Dict[int, ScalarField]
    files: List[Path] = field(default_factory=list)


def burst_recovery_snapshots(
    params: EnsembleParams,
    domain: ShorteningDomain,
    bursts: Iterable[Sequence[int]],
    eps: float,
    snapshot_iters: Sequence[int] = FIGURE_SCHEDULE,
    out_dir: Optional[Path] = None,
    max_iters: int = 50000,
    tol_success: float = 1e-10,
    tol_stall: float = 1e-12,
) -> SnapshotRun:
    """
    Secuencia de mapas de calor de p^(ℓ) en 2D; el último cuadro es la
    iteración final. Si la DE termina antes de alguna iteración del
    calendario, esos cuadros repiten el estado final, de modo que hay un
    cuadro por cada iteración del calendario.
    """
    if params.D != 2:
        raise ValueError(f"Las secuencias de instantáneas requieren D=2 (D={params.D})")
    pattern = ErasurePattern.build(eps, params.shape, [tuple(b) for b in bursts], domain)
    outcome = run_de(
        params,
        pattern,
        max_iters=max_iters,
        tol_success=tol_success,
        tol_stall=tol_stall,
        snapshot_iters=snapshot_iters,
    )
    frames = dict(outcome.snapshots)
    final = outcome.final_state.p
    for it in snapshot_iters:
        frames.setdefault(it, final)
    frames.setdefault(outcome.iters_used, final)
    run = SnapshotRun(outcome=outcome, frames=dict(sorted(frames.items())))
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for it, frame in run.frames.items():
            run.files.append(write_field_pgm(out_dir / f"snap_{it}.pgm", frame))
            run.files.append(write_field_csv(out_dir / f"snap_{it}.csv", frame))
    return run


def recoverable_burst_count(
    params: EnsembleParams,
    domain: ShorteningDomain,
    eps: float,
    max_bursts: int,
    seed: int = 0,
    min_distance: int = MIN_BURST_DISTANCE,
    max_iters: int = 50000,
    max_attempts: int = 100000,
) -> int:
    """
    Mayor n ≤ max_bursts tal que las primeras n ráfagas de una colocación
    aleatoria con semilla se decodifican (se detiene en el primer fallo).
    Si en el toro caben menos de max_bursts ráfagas, el tope es las que caben.
    """
    placed = place_random_bursts(
        params.shape, domain, max_bursts, seed, min_distance, max_attempts, allow_fewer=True
    )
    if len(placed) < max_bursts:
        logger.info(f"L={params.L}: solo caben {len(placed)} ráfagas con separación {min_distance}")
    recovered = 0
    for n in range(1, len(placed) + 1):
        pattern = ErasurePattern.build(eps, params.shape, placed[:n], domain)
        if run_de(params, pattern, max_iters=max_iters).verdict != Verdict.DECODED:
            break
        recovered = n
    logger.info(f"L={params.L}: {recovered} ráfagas recuperadas de {len(placed)}")
    return recovered
