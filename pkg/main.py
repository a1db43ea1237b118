"""
Punto de entrada de la línea de comandos del motor de evolución de densidad
"""

import argparse
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from dotenv import load_dotenv

from src.core import CouplingLogger, setup_logging
from src.core.density_evolution import ErasurePattern, Verdict, geometric_schedule, run_de
from src.core.ensemble import (
    Hypercube,
    Hyperplane,
    closed_form_rate_1d,
    design_rate,
    domain_size,
    format_domain,
    format_sections,
    hypercube_rate_bound,
    rate_counts,
    rateloss,
)
from src.core.experiments import SweepSpec, place_random_bursts, run_sweep, spread_bursts
from src.core.logging_config import log_exceptions
from src.core.threshold import (
    coupled_bp_threshold,
    coupled_threshold_auto_L,
    single_burst_bound,
    uncoupled_bp_threshold,
)
from src.utils.export import (
    fmt,
    write_field_csv,
    write_field_pgm,
    write_result,
    write_sweep_csv,
    write_trace_csv,
)
from src.utils.reproduce import FIGURES, reproduce_figure
from src.utils.run_config import (
    COMMANDS,
    ConfigError,
    RunConfig,
    apply_flags,
    load_config_file,
    write_manifest,
)

EXIT_OK = 0
EXIT_ERROR = 1
VERDICT_EXIT_CODES = {
    Verdict.DECODED: 0,
    Verdict.STALLED: 2,
    Verdict.ITER_LIMIT: 3,
}

Values = List[Tuple[str, object]]


class CommandParser(argparse.ArgumentParser):
    """Los errores de argumentos salen con código 1, no con el 2 de argparse"""

    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = CommandParser(
        prog="main.py",
        description="Evolución de densidad de códigos LDPC MD-SC sobre el BEC",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("figure", nargs="?", help=f"Figura para reproduce: {', '.join(FIGURES)}")

    parser.add_argument("--config", help="Archivo clave=valor (p. ej. un manifest.txt previo)")
    parser.add_argument("--log-level", dest="log_level")

    ensemble = parser.add_argument_group("ensamble")
    ensemble.add_argument("--dl", type=int)
    ensemble.add_argument("--dr", type=int)
    ensemble.add_argument("--bigL", dest="L", type=int)
    ensemble.add_argument("--dim", dest="D", type=int)
    ensemble.add_argument("--w", type=int)
    ensemble.add_argument("--M", dest="M", type=int)
    ensemble.add_argument("--domain", help="empty | hyperplane:width=W[,axis=A] | hypercube:z=Z | explicit:i;j;...")

    pattern = parser.add_argument_group("patrón de borrado")
    pattern.add_argument("--eps", type=float)
    pattern.add_argument("--bursts", help="Secciones con ráfaga: i1,i2;j1,j2;...")
    pattern.add_argument("--burst-eps", dest="burst_eps", type=float)
    pattern.add_argument("--random-bursts", dest="random_bursts", type=int)
    pattern.add_argument("--placement", choices=("spread", "random"))
    pattern.add_argument("--min-distance", dest="min_distance", type=int)
    pattern.add_argument("--seed", type=int)

    numeric = parser.add_argument_group("tolerancias")
    numeric.add_argument("--tol-success", dest="tol_success", type=float)
    numeric.add_argument("--tol-stall", dest="tol_stall", type=float)
    numeric.add_argument("--tol-eps", dest="tol_eps", type=float)
    numeric.add_argument("--max-iters", dest="max_iters", type=int)
    numeric.add_argument("--l-max", dest="l_max", type=int)
    numeric.add_argument("--auto-L", dest="auto_L", action="store_const", const=True)
    numeric.add_argument("--uncoupled", action="store_const", const=True)

    sweep = parser.add_argument_group("barridos")
    sweep.add_argument("--variable", choices=("window_w", "hypercube_z", "burst_count"))
    sweep.add_argument("--values")
    sweep.add_argument("--dims")
    sweep.add_argument("--burst-counts", dest="burst_counts")

    output = parser.add_argument_group("salida")
    output.add_argument("--snapshots", help="Iteraciones a guardar, separadas por comas")
    output.add_argument("--out")
    output.add_argument("--jobs", type=int)
    output.add_argument("--no-progress", dest="progress", action="store_const", const=False)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Valores por defecto < --config < flags"""
    config = RunConfig()
    if args.config:
        load_config_file(args.config, config)
    flags = {k: v for k, v in vars(args).items() if k not in ("config", "log_level")}
    apply_flags(config, flags)
    if config.command not in COMMANDS:
        raise ConfigError(f"Comando desconocido: '{config.command}' (disponibles: {', '.join(COMMANDS)})")
    return config


def emit(config: RunConfig, values: Values, checks: Sequence = ()) -> None:
    """Imprime los resultados y los escribe en result.txt"""
    for key, value in values:
        print(f"{key}={fmt(value)}")
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'}: {check.name}")
    write_result(config.out_dir / "result.txt", values, checks)


def resolve_bursts(config: RunConfig, params, domain) -> List[Tuple[int, ...]]:
    """Ráfagas explícitas más las colocadas al azar con la semilla"""
    bursts = config.burst_list()
    if config.random_bursts:
        bursts += place_random_bursts(
            params.shape, domain, config.random_bursts, config.seed, config.min_distance
        )
    return bursts


@log_exceptions
def cmd_rate(config: RunConfig, logger: CouplingLogger) -> int:
    params, domain = config.params(), config.domain
    domain.validate(params.shape)
    rate = design_rate(params, domain)
    logger.rate_report(rate)
    counts = rate_counts(params, domain, config.M)

    values: Values = [
        ("design_rate", rate),
        ("rateloss", rateloss(params, domain)),
        ("domain", format_domain(domain)),
        ("domain_size", domain_size(domain, params.shape)),
        ("check_nodes", counts.check_nodes),
        ("bit_nodes", counts.bit_nodes),
    ]
    if params.D == 1 and isinstance(domain, Hyperplane) and domain.width == params.w:
        closed = closed_form_rate_1d(params)
        values += [(f"closed_form[{name}]", v) for name, v in closed.variants.items()]
        values.append(("closed_form_matching", ",".join(closed.matching)))
    if isinstance(domain, Hypercube):
        bound = hypercube_rate_bound(params, domain.z)
        values.append(("hypercube_bound", bound))
        values.append(("bound_holds", rate >= bound - 1e-12))
    emit(config, values)
    return EXIT_OK


@log_exceptions
def cmd_evolve(config: RunConfig, logger: CouplingLogger) -> int:
    params, domain = config.params(), config.domain
    bursts = resolve_bursts(config, params, domain)
    pattern = ErasurePattern.build(config.eps, params.shape, bursts, domain, config.burst_eps)
    outcome = run_de(
        params,
        pattern,
        max_iters=config.max_iters,
        tol_success=config.tol_success,
        tol_stall=config.tol_stall,
        snapshot_iters=config.snapshot_list() or geometric_schedule(config.max_iters),
        keep_trace=True,
    )
    logger.verdict(outcome)

    out = config.out_dir
    write_trace_csv(out / "trace.csv", outcome.pb_trace)
    for it, frame in sorted(outcome.snapshots.items()):
        write_field_csv(out / f"snap_{it}.csv", frame)
        if params.D == 2:
            write_field_pgm(out / f"snap_{it}.pgm", frame)

    emit(
        config,
        [
            ("verdict", outcome.verdict.value),
            ("iters", outcome.iters_used),
            ("final_pb", outcome.final_pb),
            ("residual_delta", outcome.residual_delta),
            ("bursts", format_sections(pattern.bursts)),
        ],
    )
    return VERDICT_EXIT_CODES[outcome.verdict]


@log_exceptions
def cmd_threshold(config: RunConfig, logger: CouplingLogger) -> int:
    spec = config.bisection()
    values: Values = []
    if config.uncoupled:
        result = uncoupled_bp_threshold(config.dl, config.dr, config.tol_eps)
    else:
        params, domain = config.params(), config.domain
        if config.auto_L:
            # Las coordenadas explícitas no escalan con L: se recolocan según la política
            count = len(config.burst_list()) + config.random_bursts

            def bursts_for(shape, dom):
                if config.placement == "random":
                    return place_random_bursts(shape, dom, count, config.seed, config.min_distance)
                return spread_bursts(shape, dom, count)

            result = coupled_threshold_auto_L(
                params,
                lambda shape: domain,
                bursts_for,
                burst_count=count,
                spec=spec,
                l_max=config.l_max,
                burst_eps=config.burst_eps,
            )
        else:
            bursts = resolve_bursts(config, params, domain)
            count = len(bursts)
            result = coupled_bp_threshold(params, domain, bursts, spec, config.burst_eps)
        if count == 1:
            bound = single_burst_bound(
                config.dl, config.dr, config.w, config.D, config.burst_eps, config.tol_eps
            )
            values.append(("single_burst_bound", bound.value))
    logger.threshold_found(result)

    values = [
        ("eps_star", result.eps_star),
        ("lo", result.lo),
        ("hi", result.hi),
        ("evaluations", result.evaluations),
        ("L_used", result.L_used),
        ("unrecoverable", result.unrecoverable),
        ("converged", result.converged),
    ] + values
    emit(config, values)
    return EXIT_OK


@log_exceptions
def cmd_sweep(config: RunConfig, logger: CouplingLogger) -> int:
    spec = SweepSpec(
        variable=config.variable,
        values=config.value_list(),
        base=config.params(),
        dims=config.dim_list(),
        burst_counts=config.burst_count_list() or (0,),
        placement=config.placement,
        seed=config.seed,
        min_distance=config.min_distance,
        bisection=config.bisection(),
        l_max=config.l_max,
    )
    rows = run_sweep(spec, jobs=config.jobs, progress=config.progress)
    for row in rows:
        logger.sweep_cell(row)
    write_sweep_csv(config.out_dir / "sweep.csv", rows)

    failed = sum(1 for r in rows if r.error)
    if failed:
        logger.warning(f"{failed} de {len(rows)} celdas fallaron")
    emit(config, [("cells", len(rows)), ("failed", failed)])
    return EXIT_OK


@log_exceptions
def cmd_reproduce(config: RunConfig, logger: CouplingLogger) -> int:
    if not config.figure:
        raise ConfigError(f"reproduce requiere una figura: {', '.join(FIGURES)}")
    report = reproduce_figure(config.figure, config)
    emit(config, report.values, report.checks)
    if report.passed:
        logger.success(f"{config.figure}: todas las comprobaciones pasaron")
        return EXIT_OK
    return EXIT_ERROR


COMMAND_HANDLERS: Dict[str, Callable[[RunConfig, CouplingLogger], int]] = {
    "rate": cmd_rate,
    "evolve": cmd_evolve,
    "threshold": cmd_threshold,
    "sweep": cmd_sweep,
    "reproduce": cmd_reproduce,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Función principal del programa; devuelve el código de salida"""
    load_dotenv()
    setup_logging(
        log_level=os.getenv("LOG_LEVEL", "INFO"),
        log_file=os.getenv("LOG_FILE", "logs/sc_de.log"),
    )
    logger = CouplingLogger(__name__)

    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            setup_logging(log_level=args.log_level, log_file=os.getenv("LOG_FILE", "logs/sc_de.log"))

        config = resolve_config(args)
        write_manifest(config)
        logger.info(f"Ejecutando '{config.command}' con salida en {config.out_dir}")
        return COMMAND_HANDLERS[config.command](config, logger)

    except KeyboardInterrupt:
        logger.info("Ejecución detenida por el usuario.")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Error: {e}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
