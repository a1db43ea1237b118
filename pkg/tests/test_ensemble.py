"""
Tests para el ensamble, los dominios de acortamiento y las tasas
"""

import numpy as np
import pytest

from src.core.ensemble import (
    CouplingWindow,
    Empty,
    EnsembleParams,
    Explicit,
    Hypercube,
    Hyperplane,
    closed_form_rate_1d,
    design_rate,
    domain_size,
    equal_section_comparison,
    explicit,
    format_domain,
    hypercube_rate_bound,
    indicator,
    members,
    parse_domain,
    parse_sections,
    rate_counts,
    rateloss,
)
from src.core.torus_grid import FORWARD, GridShape, ScalarField, TorusIndex


class TestEnsembleParams:
    def test_rejects_small_bit_degree(self):
        """Test de rechazo de dl < 3 citando la restricción"""
        with pytest.raises(ValueError, match="dl ≥ 3"):
            EnsembleParams(dl=2, dr=6, L=10)

    def test_rejects_check_degree(self):
        """Test de rechazo de dr ≤ dl"""
        with pytest.raises(ValueError, match="dr > dl"):
            EnsembleParams(dl=3, dr=3, L=10)

    def test_rejects_short_chain(self):
        """Test de rechazo de L ≤ w"""
        with pytest.raises(ValueError, match="L > w"):
            EnsembleParams(dl=3, dr=6, L=4, w=4)

    def test_with_replaces_fields(self):
        """Test de copia con cambios"""
        params = EnsembleParams(3, 6, 16, 1, 2)
        bigger = params.with_(L=32, D=2)
        assert (bigger.L, bigger.D, bigger.w) == (32, 2, 2)
        assert params.L == 16

    def test_window_weights(self):
        """Test de pesos uniformes 1/w^D que suman 1"""
        window = EnsembleParams(3, 6, 10, 2, 3).window
        total = sum(window.weight((a, b)) for a in range(-1, 5) for b in range(-1, 5))
        assert total == pytest.approx(1.0, abs=1e-15)
        assert window.weight((2, 0)) == pytest.approx(1 / 9)
        assert window.weight((3, 0)) == 0.0
        assert CouplingWindow(2, 1).weight((-1,)) == 0.0

    def test_window_average_matches_weights(self):
        """Test de que el promedio de ventana coincide con Σ_j ω_j f(i + j)"""
        window = CouplingWindow(3, 2)
        rng = np.random.default_rng(5)
        field = ScalarField(GridShape(D=2, L=7), rng.random((7, 7)))
        averaged = window.average(field, FORWARD)
        expected = sum(
            window.weight((a, b)) * field.values[(4 + a) % 7, (6 + b) % 7]
            for a in range(3)
            for b in range(3)
        )
        assert averaged.values[4, 6] == pytest.approx(expected, rel=1e-12)

    def test_window_average_dimension_mismatch(self):
        """Test de campo con dimensión distinta a la de la ventana"""
        with pytest.raises(ValueError, match="ventana"):
            CouplingWindow(2, 1).average(ScalarField.constant(GridShape(D=2, L=5), 0.5), FORWARD)


class TestDomains:
    def test_hyperplane_membership(self):
        """Test de pertenencia al hiperplano sobre el último eje por defecto"""
        plane = Hyperplane(width=2)
        assert plane.contains(TorusIndex((7, 1)))
        assert not plane.contains(TorusIndex((0, 2)))
        assert Hyperplane(width=2, axis=0).contains(TorusIndex((1, 9)))

    def test_domain_size(self):
        """Test de #Z para cada tipo de dominio"""
        shape = GridShape(D=2, L=10)
        assert domain_size(Empty(), shape) == 0
        assert domain_size(Hyperplane(width=3), shape) == 30
        assert domain_size(Hypercube(4), shape) == 16
        assert domain_size(Explicit(frozenset({(0, 0), (5, 5)})), shape) == 2

    def test_indicator_matches_size(self):
        """Test de que el indicador suma #Z"""
        shape = GridShape(D=3, L=6)
        for domain in (Hyperplane(width=2, axis=1), Hypercube(3)):
            assert indicator(domain, shape).values.sum() == domain_size(domain, shape)

    def test_members(self):
        """Test de coordenadas de las secciones de Z"""
        shape = GridShape(D=1, L=101)
        z = explicit([(0,), (1,), (-1,)], shape)
        assert [tuple(m) for m in members(z, shape)] == [(0,), (1,), (100,)]

    def test_invalid_domains(self):
        """Test de validación de dominios fuera de rango"""
        shape = GridShape(D=2, L=8)
        with pytest.raises(ValueError, match="hiperplano"):
            Hyperplane(width=8).validate(shape)
        with pytest.raises(ValueError, match="hipercubo"):
            Hypercube(0).validate(shape)
        with pytest.raises(ValueError, match="explícito"):
            Explicit(frozenset({(8, 0)})).validate(shape)
        with pytest.raises(ValueError, match="Eje"):
            Hyperplane(width=2, axis=2).validate(shape)


class TestParsing:
    def test_parse_domain_kinds(self):
        """Test de la sintaxis <kind:args>"""
        assert parse_domain("empty", 1) == Empty()
        assert parse_domain("hyperplane:width=4", 1) == Hyperplane(width=4)
        assert parse_domain("hyperplane:width=2,axis=0", 2) == Hyperplane(width=2, axis=0)
        assert parse_domain("hypercube:z=15", 2) == Hypercube(15)
        assert parse_domain("explicit:0;1;100", 1) == Explicit(frozenset({(0,), (1,), (100,)}))

    def test_format_round_trip(self):
        """Test de que format_domain produce texto interpretable"""
        for domain in (Hyperplane(width=3, axis=1), Hypercube(5), Explicit(frozenset({(1, 2)}))):
            assert parse_domain(format_domain(domain), 2) == domain

    @pytest.mark.parametrize(
        "text", ["hyperplane", "hypercube:z=x", "torus:z=2", "hyperplane:width"]
    )
    def test_parse_domain_errors(self, text):
        """Test de dominios mal formados"""
        with pytest.raises(ValueError):
            parse_domain(text, 2)

    def test_parse_sections_errors(self):
        """Test de coordenadas mal formadas o con D incorrecto"""
        with pytest.raises(ValueError, match="mal formada"):
            parse_sections("3,x", 2)
        with pytest.raises(ValueError, match="D=2"):
            parse_sections("1,2,3", 2)
        assert parse_sections("1,2; 3,4", 2) == frozenset({(1, 2), (3, 4)})


class TestDesignRate:
    @pytest.mark.parametrize("dl,dr,L,D,w", [(3, 6, 10, 1, 2), (4, 8, 9, 2, 3), (3, 9, 5, 3, 2)])
    def test_empty_domain_rate(self, dl, dr, L, D, w):
        """Test de R = 1 - dl/dr sin acortamiento"""
        params = EnsembleParams(dl, dr, L, D, w)
        assert design_rate(params, Empty()) == 1 - dl / dr

    def test_empty_domain_half(self):
        """Test de tasa 0.5 exacta para (3,6)"""
        assert design_rate(EnsembleParams(3, 6, 101, 1, 4), Empty()) == 0.5

    def test_shortening_lowers_rate(self):
        """Test de que acortar reduce la tasa"""
        params = EnsembleParams(3, 6, 101, 1, 4)
        assert design_rate(params, Hyperplane(width=4)) < 0.5
        assert rateloss(params, Hyperplane(width=4)) > 0

    def test_closed_form_matches(self):
        """Test de la variante de signo corregido frente a la tasa directa"""
        closed = closed_form_rate_1d(EnsembleParams(3, 6, 101, 1, 4))
        assert "sign_corrected" in closed.matching
        assert "printed" not in closed.matching
        assert closed.variants["sign_corrected"] == pytest.approx(closed.design, abs=1e-12)
        assert closed.variants["printed"] > 0.5

    @pytest.mark.parametrize("L,w", [(7, 4), (9, 5), (30, 3), (64, 2)])
    def test_closed_form_matches_short_chains(self, L, w):
        """Test de coincidencia con L ≥ 2w - 1"""
        closed = closed_form_rate_1d(EnsembleParams(3, 6, L, 1, w))
        assert "sign_corrected" in closed.matching

    def test_closed_form_requires_1d(self):
        """Test de rechazo de la fórmula cerrada en 2D"""
        with pytest.raises(ValueError, match="D=1"):
            closed_form_rate_1d(EnsembleParams(3, 6, 10, 2, 2))

    def test_hyperplane_rate_matches_chain(self):
        """Test de igualdad de tasa entre hiperplano 2D y cadena 1D"""
        plane = design_rate(EnsembleParams(3, 6, 16, 2, 2), Hyperplane(width=2))
        chain = design_rate(EnsembleParams(3, 6, 16, 1, 2), Hyperplane(width=2, axis=0))
        assert abs(plane - chain) < 1e-12

    def test_rate_counts(self):
        """Test de los conteos C y V del argumento de la tasa"""
        params = EnsembleParams(3, 6, 20, 1, 2)
        counts = rate_counts(params, Hyperplane(width=2), M=100)
        assert counts.bit_nodes == 100 * 18
        assert counts.rate == pytest.approx(design_rate(params, Hyperplane(width=2)), abs=1e-14)

    def test_full_domain_rejected(self):
        """Test de #Z = L^D sin bits transmitidos"""
        params = EnsembleParams(3, 6, 3, 1, 2)
        with pytest.raises(ValueError, match="#Z"):
            design_rate(params, Explicit(frozenset({(0,), (1,), (2,)})))

    def test_rate_independent_of_M(self):
        """Test de que C/V no depende del número de bits por sección"""
        params = EnsembleParams(3, 6, 20, 2, 2)
        domain = Hypercube(5)
        rates = [rate_counts(params, domain, M=m).rate for m in (1, 7, 1000)]
        reference = design_rate(params, domain)
        for rate in rates:
            assert rate == pytest.approx(reference, abs=1e-14)
        for m in (1, 7, 1000):
            assert design_rate(params.with_(M=m), domain) == reference

    @pytest.mark.parametrize("L", [8, 16])
    @pytest.mark.parametrize("w", [2, 3, 4])
    @pytest.mark.parametrize("D", [2, 3])
    def test_hyperplane_rate_equals_chain_grid(self, L, w, D):
        """Test de igualdad de tasa hiperplano/cadena para varios (L, w, D)"""
        plane = design_rate(EnsembleParams(3, 6, L, D, w), Hyperplane(width=w))
        chain = design_rate(EnsembleParams(3, 6, L, 1, w), Hyperplane(width=w, axis=0))
        assert abs(plane - chain) < 1e-12

    def test_hyperplane_rate_axis_invariant(self):
        """Test de que la tasa no depende del eje acortado"""
        params = EnsembleParams(3, 6, 10, 3, 3)
        rates = [design_rate(params, Hyperplane(width=3, axis=a)) for a in range(3)]
        assert max(rates) - min(rates) < 1e-12

    def test_rate_non_increasing_for_nested_hypercubes(self):
        """Test de tasa no creciente al crecer z con Z ⊂ Z'"""
        params = EnsembleParams(3, 6, 16, 2, 2)
        rates = [design_rate(params, Hypercube(z)) for z in range(1, 11)]
        for smaller, larger in zip(rates, rates[1:]):
            assert larger <= smaller + 1e-15


class TestHypercubeBound:
    @pytest.mark.parametrize("L", [8, 16, 101])
    @pytest.mark.parametrize("z", [2, 4, 15])
    @pytest.mark.parametrize("D", [1, 2])
    def test_bound_holds(self, L, z, D):
        """Test de R ≥ 1 - (dl/dr) L^D / (L^D - z^D)"""
        if z >= L:
            pytest.skip("z debe ser menor que L")
        params = EnsembleParams(3, 6, L, D, 2)
        rate = design_rate(params, Hypercube(z))
        assert rate >= hypercube_rate_bound(params, z) - 1e-12

    def test_rateloss_scaling(self):
        """Test de que rateloss·L^D permanece acotado al duplicar L"""
        scaled = []
        for L in (16, 32, 64, 128):
            params = EnsembleParams(3, 6, L, 2, 2)
            scaled.append(rateloss(params, Hypercube(4)) * L**2)
        assert all(b <= a + 1e-9 for a, b in zip(scaled, scaled[1:]))
        assert scaled[-1] > 0

    def test_bound_rejects_large_cube(self):
        """Test de z fuera de rango"""
        with pytest.raises(ValueError):
            hypercube_rate_bound(EnsembleParams(3, 6, 8, 2, 2), 8)

    def test_equal_section_comparison(self):
        """Test de comparación a igual número de secciones"""
        comparison = equal_section_comparison(3, 6, 2, 16, 2, 4)
        assert comparison.sections == 256
        assert comparison.chain_rateloss > 0
        assert comparison.torus_rateloss > 0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
