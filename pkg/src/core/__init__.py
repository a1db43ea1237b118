"""
Core del sistema - Toro, ensamble, evolución de densidad y umbrales
"""

from .torus_grid import GridShape, ScalarField, TorusIndex, box_window_sum
from .ensemble import (
    EnsembleParams,
    Empty,
    Hyperplane,
    Hypercube,
    Explicit,
    design_rate,
    closed_form_rate_1d,
    hypercube_rate_bound,
)
from .density_evolution import ErasurePattern, DEOutcome, Verdict, run_de
from .threshold import (
    BisectionSpec,
    BracketError,
    BurstBound,
    ThresholdResult,
    coupled_bp_threshold,
    single_burst_bound,
    uncoupled_bp_threshold,
)
from .logging_config import setup_logging, CouplingLogger

__all__ = [
    "GridShape",
    "ScalarField",
    "TorusIndex",
    "box_window_sum",
    "EnsembleParams",
    "Empty",
    "Hyperplane",
    "Hypercube",
    "Explicit",
    "design_rate",
    "closed_form_rate_1d",
    "hypercube_rate_bound",
    "ErasurePattern",
    "DEOutcome",
    "Verdict",
    "run_de",
    "BisectionSpec",
    "BracketError",
    "BurstBound",
    "ThresholdResult",
    "coupled_bp_threshold",
    "single_burst_bound",
    "uncoupled_bp_threshold",
    "setup_logging",
    "CouplingLogger",
]
