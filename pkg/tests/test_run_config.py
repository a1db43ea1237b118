"""
Tests para la configuración de ejecución, el manifiesto y la exportación
"""

import numpy as np
import pytest
from dotenv import dotenv_values

from src.core.ensemble import Empty, Explicit, Hypercube, Hyperplane
from src.core.experiments import SweepRow
from src.core.torus_grid import GridShape, ScalarField
from src.utils.export import (
    Check,
    field_to_csv,
    field_to_pgm,
    fmt,
    render_result,
    write_sweep_csv,
    write_trace_csv,
)
from src.utils.run_config import (
    ConfigError,
    RunConfig,
    apply_flags,
    apply_values,
    load_config_file,
    render_manifest,
    write_manifest,
)


class TestRunConfig:
    def test_defaults(self):
        """Test de valores por defecto materializados"""
        config = RunConfig()
        assert config.command == "rate"
        assert config.domain == Empty()
        assert config.tol_success == 1e-10
        assert config.tol_stall == 1e-12
        assert config.max_iters == 50000
        assert config.params().L == 101

    def test_load_file(self, tmp_path):
        """Test de lectura de un archivo clave=valor"""
        path = tmp_path / "run.cfg"
        path.write_text(
            "# configuración de prueba\n"
            "command=evolve\n"
            "L=64\n"
            "D=2\n"
            "w=2\n"
            "eps=0.45\n"
            "domain.kind=hypercube\n"
            "domain.z=8\n"
            "auto_L=true\n",
            encoding="utf-8",
        )
        config = load_config_file(str(path))
        assert config.command == "evolve"
        assert (config.L, config.D, config.w) == (64, 2, 2)
        assert config.eps == 0.45
        assert config.domain == Hypercube(8)
        assert config.auto_L is True

    def test_explicit_domain_keys(self):
        """Test de dominio explícito desde claves"""
        config = apply_values(RunConfig(), {"domain.kind": "explicit", "domain.sections": "0;1;100"})
        assert config.domain == Explicit(frozenset({(0,), (1,), (100,)}))

    def test_hyperplane_requires_width(self):
        """Test de hiperplano sin ancho"""
        with pytest.raises(ConfigError, match="domain.width"):
            apply_values(RunConfig(), {"domain.kind": "hyperplane"})

    def test_unknown_key(self):
        """Test de clave desconocida"""
        with pytest.raises(ConfigError, match="desconocida"):
            apply_values(RunConfig(), {"colour": "blue"})

    def test_bad_values(self):
        """Test de valores no convertibles"""
        with pytest.raises(ConfigError, match="L"):
            apply_values(RunConfig(), {"L": "cien"})
        with pytest.raises(ConfigError, match="auto_L"):
            apply_values(RunConfig(), {"auto_L": "quizás"})

    def test_missing_file(self, tmp_path):
        """Test de archivo inexistente"""
        with pytest.raises(ConfigError, match="No existe"):
            load_config_file(str(tmp_path / "nada.cfg"))

    def test_flags_override_file(self):
        """Test de precedencia de flags sobre el archivo"""
        config = apply_values(RunConfig(), {"eps": "0.3", "w": "3"})
        apply_flags(config, {"eps": 0.4, "w": None, "D": 2, "domain": "hyperplane:width=2"})
        assert config.eps == 0.4
        assert config.w == 3
        assert config.domain == Hyperplane(width=2)

    def test_flag_domain_error(self):
        """Test de dominio mal formado en flags"""
        with pytest.raises(ConfigError):
            apply_flags(RunConfig(), {"domain": "hypercube"})

    def test_burst_list(self):
        """Test de ráfagas explícitas y mal formadas"""
        assert RunConfig(bursts="70;31").burst_list() == [(31,), (70,)]
        with pytest.raises(ConfigError, match="Ráfagas"):
            RunConfig(bursts="3,x").burst_list()

    def test_int_lists(self):
        """Test de listas de enteros"""
        config = RunConfig(values="2,4,8", snapshots="")
        assert config.value_list() == (2, 4, 8)
        assert config.snapshot_list() == []
        with pytest.raises(ConfigError):
            RunConfig(dims="1,dos").dim_list()


class TestManifest:
    @pytest.mark.parametrize(
        "domain",
        [Empty(), Hyperplane(width=4), Hyperplane(width=2, axis=0), Hypercube(15), Explicit(frozenset({(0, 1), (5, 5)}))],
    )
    def test_round_trip(self, tmp_path, domain):
        """Test de que el manifiesto reproduce la configuración"""
        config = RunConfig(
            command="evolve", D=2, L=32, w=2, domain=domain, eps=0.48, bursts="10,10;20,20",
            random_bursts=3, seed=42, out=str(tmp_path), auto_L=True,
        )
        path = write_manifest(config)
        assert path.name == "manifest.txt"
        reloaded = load_config_file(str(path))
        assert reloaded == config

    def test_manifest_is_flat_key_value(self):
        """Test del formato clave=valor del manifiesto"""
        text = render_manifest(RunConfig())
        lines = [l for l in text.splitlines() if l and not l.startswith("#")]
        assert all("=" in l for l in lines)
        assert "tol_success=1e-10" in lines
        assert "domain.kind=empty" in lines
        assert "M=" in lines


class TestExport:
    def test_fmt(self):
        """Test de formato con 12 cifras significativas"""
        assert fmt(0.1) == "0.1"
        assert fmt(1 / 3) == "0.333333333333"
        assert fmt(7) == "7"
        assert fmt(None) == ""
        assert fmt(np.float64(0.5)) == "0.5"

    def test_field_csv_1d(self):
        """Test de CSV 1D en una línea"""
        field = ScalarField(GridShape(1, 3), [0.0, 0.5, 1.0])
        assert field_to_csv(field) == "0,0.5,1\n"

    def test_field_csv_2d(self):
        """Test de CSV 2D con una línea por fila"""
        field = ScalarField(GridShape(2, 2), [[0.0, 0.25], [0.5, 1.0]])
        assert field_to_csv(field) == "0,0.25\n0.5,1\n"

    def test_field_csv_3d(self):
        """Test de CSV con cabecera para D ≥ 3"""
        field = ScalarField.constant(GridShape(3, 2), 0.5)
        lines = field_to_csv(field).splitlines()
        assert lines[0] == "D=3,L=2,order=row-major"
        assert len(lines) == 9

    def test_pgm(self):
        """Test del mapa de calor PGM: borrado 1.0 en negro"""
        field = ScalarField(GridShape(2, 2), [[1.0, 0.0], [0.5, 0.0]])
        data = field_to_pgm(field)
        header = b"P5\n2 2\n255\n"
        assert data.startswith(header)
        assert list(data[len(header):]) == [0, 255, 128, 255]

    def test_pgm_requires_2d(self):
        """Test de rechazo del PGM fuera de 2D"""
        with pytest.raises(ValueError, match="D=2"):
            field_to_pgm(ScalarField.constant(GridShape(1, 4), 0.1))

    def test_trace_csv(self, tmp_path):
        """Test de la traza iter, pb, delta_max"""
        path = write_trace_csv(tmp_path / "trace.csv", [(0, 0.4, float("nan")), (1, 0.3, 0.1)])
        assert path.read_text().splitlines() == ["iter,pb,delta_max", "0,0.4,nan", "1,0.3,0.1"]

    def test_sweep_csv(self, tmp_path):
        """Test de columnas del barrido"""
        rows = [SweepRow(1, 2, 1, 2, L_used=16, eps_star=0.0, lo=0.0, hi=0.0, evaluations=1)]
        lines = write_sweep_csv(tmp_path / "sweep.csv", rows).read_text().splitlines()
        assert lines[0].startswith("D,w_or_z,bursts,L_used,eps_star,lo,hi,evaluations,seed")
        assert lines[1].startswith("1,2,1,16,0,0,0,1,0")

    def test_render_result(self):
        """Test de result.txt con líneas PASS/FAIL"""
        text = render_result(
            [("eps_star", 0.48821), ("verdict", "Stalled")],
            [Check("stall near ±31", True), Check("sin ráfagas decodifica", False, "IterLimit")],
        )
        assert text.splitlines() == [
            "eps_star=0.48821",
            "verdict=Stalled",
            "PASS: stall near ±31",
            "FAIL: sin ráfagas decodifica (IterLimit)",
        ]

    def test_dotenv_reads_manifest_values(self, tmp_path):
        """Test de que python-dotenv conserva ';' y ',' en los valores"""
        path = tmp_path / "m.txt"
        path.write_text("bursts=10,10;20,20\ndomain.sections=0;1\n", encoding="utf-8")
        values = dotenv_values(path)
        assert values["bursts"] == "10,10;20,20"
        assert values["domain.sections"] == "0;1"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
