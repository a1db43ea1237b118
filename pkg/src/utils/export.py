"""
Exportación de campos, trazas y barridos a CSV / PGM
"""

import csv
import io
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence, Tuple

import numpy as np
from jinja2 import Template

from ..core.torus_grid import ScalarField

SWEEP_COLUMNS = [
    "D",
    "w_or_z",
    "bursts",
    "L_used",
    "eps_star",
    "lo",
    "hi",
    "evaluations",
    "seed",
    "coupled_sections",
    "converged",
    "error",
]


def fmt(value) -> str:
    """Números reales con 12 cifras significativas; el resto tal cual"""
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def field_to_csv(field: ScalarField) -> str:
    """
    D=1: una línea; D=2: una línea por corte del eje 0;
    D≥3: cabecera "D,L,order=row-major" y la lista plana, un valor por línea.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    shape = field.shape
    if shape.D == 1:
        writer.writerow([fmt(v) for v in field.values])
    elif shape.D == 2:
        for row in field.values:
            writer.writerow([fmt(v) for v in row])
    else:
        writer.writerow([f"D={shape.D}", f"L={shape.L}", "order=row-major"])
        for v in field.flat:
            writer.writerow([fmt(v)])
    return buffer.getvalue()


def field_to_pgm(field: ScalarField) -> bytes:
    """PGM binario de 8 bits (solo D=2); v -> round(255·(1 - v)), borrado 1.0 en negro"""
    if field.shape.D != 2:
        raise ValueError(f"El mapa de calor PGM requiere D=2 (D={field.shape.D})")
    values = np.clip(field.values, 0.0, 1.0)
    pixels = np.rint(255.0 * (1.0 - values)).astype(np.uint8)
    rows, cols = pixels.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def write_field_csv(path: Path, field: ScalarField) -> Path:
    path = Path(path)
    path.write_text(field_to_csv(field), encoding="utf-8")
    return path


def write_field_pgm(path: Path, field: ScalarField) -> Path:
    path = Path(path)
    path.write_bytes(field_to_pgm(field))
    return path


def write_trace_csv(path: Path, trace: Iterable[Tuple[int, float, float]]) -> Path:
    """Una fila por iteración: iter, pb, delta_max"""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["iter", "pb", "delta_max"])
        for it, pb, delta in trace:
            writer.writerow([it, fmt(pb), fmt(delta)])
    return path


def write_profile_csv(path: Path, snapshots: dict) -> Path:
    """Perfil 1D: una fila por iteración guardada, una columna por sección"""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        for it, values in sorted(snapshots.items()):
            writer.writerow([it] + [fmt(v) for v in np.ravel(values)])
    return path


def write_sweep_csv(path: Path, rows: Sequence) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(SWEEP_COLUMNS)
        for row in rows:
            record = asdict(row)
            writer.writerow([fmt(record.get(col)) for col in SWEEP_COLUMNS])
    return path


@dataclass
class Check:
    """Comprobación PASS/FAIL de una reproducción"""

    name: str
    passed: bool
    detail: str = ""


RESULT_TEMPLATE = Template(
    "{% for key, value in values %}{{ key }}={{ fmt(value) }}\n{% endfor %}"
    "{% for check in checks %}{{ 'PASS' if check.passed else 'FAIL' }}: {{ check.name }}"
    "{% if check.detail %} ({{ check.detail }}){% endif %}\n{% endfor %}"
)


def render_result(values: Sequence[Tuple[str, object]], checks: Sequence[Check] = ()) -> str:
    return RESULT_TEMPLATE.render(values=list(values), checks=list(checks), fmt=fmt)


def write_result(
    path: Path, values: Sequence[Tuple[str, object]], checks: Sequence[Check] = ()
) -> Path:
    """result.txt: pares clave=valor seguidos de las líneas PASS/FAIL"""
    path = Path(path)
    path.write_text(render_result(values, checks), encoding="utf-8")
    return path
