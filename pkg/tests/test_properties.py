"""
Propiedades aleatorizadas de la evolución de densidad, con semillas registradas
"""

import numpy as np
import pytest

from src.core.density_evolution import ErasurePattern, de_step, init_state, run_de
from src.core.ensemble import EnsembleParams, Explicit
from src.core.threshold import scalar_de_trajectory
from src.core.torus_grid import (
    BACKWARD,
    FORWARD,
    GridShape,
    ScalarField,
    box_window_sum,
    naive_box_window_sum,
    translate,
)

SEEDS = range(100)
STEPS = 25


def random_case(seed: int):
    """Ensamble pequeño con Z y ráfagas aleatorias"""
    rng = np.random.default_rng(seed)
    D = int(rng.integers(1, 3))
    w = int(rng.integers(1, 4))
    L = int(rng.integers(w + 2, 10 if D == 2 else 24))
    dl = int(rng.integers(3, 5))
    dr = int(rng.integers(dl + 1, 9))
    params = EnsembleParams(dl, dr, L, D, w)

    cells = [tuple(int(c) for c in cell) for cell in np.ndindex(*params.shape.dims)]
    order = rng.permutation(len(cells))
    n_domain = int(rng.integers(0, max(1, len(cells) // 4)))
    n_bursts = int(rng.integers(0, 3))
    domain = Explicit(frozenset(cells[i] for i in order[:n_domain]))
    bursts = [cells[i] for i in order[n_domain:n_domain + n_bursts]]
    eps = float(rng.uniform(0.0, 0.7))
    return params, domain, bursts, eps, rng


def evolve(params, pattern, steps=STEPS):
    state = init_state(params, pattern)
    history = [state.p.values]
    for _ in range(steps):
        state = de_step(state)
        history.append(state.p.values)
    return history


class TestMonotonicity:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_pb_non_increasing_in_iterations(self, seed):
        """Test de P_b^(ℓ+1) ≤ P_b^(ℓ) a lo largo de la traza"""
        params, domain, bursts, eps, _ = random_case(seed)
        pattern = ErasurePattern.build(eps, params.shape, bursts, domain)
        outcome = run_de(params, pattern, max_iters=STEPS, keep_trace=True)
        trace = [pb for _, pb, _ in outcome.pb_trace]
        assert trace[0] >= 0.0
        for before, after in zip(trace, trace[1:]):
            assert after <= before

    @pytest.mark.parametrize("seed", SEEDS)
    def test_non_increasing_in_iterations(self, seed):
        """Test de p^(ℓ+1) ≤ p^(ℓ) en todas las secciones"""
        params, domain, bursts, eps, _ = random_case(seed)
        history = evolve(params, ErasurePattern.build(eps, params.shape, bursts, domain))
        for before, after in zip(history, history[1:]):
            assert np.all(after <= before)
            assert np.all(after >= 0.0)

    @pytest.mark.parametrize("seed", SEEDS)
    def test_non_decreasing_in_eps(self, seed):
        """Test de que aumentar ε no reduce p en ninguna iteración"""
        params, domain, bursts, eps, rng = random_case(seed)
        larger = min(1.0, eps + float(rng.uniform(0.0, 0.3)))
        low = evolve(params, ErasurePattern.build(eps, params.shape, bursts, domain))
        high = evolve(params, ErasurePattern.build(larger, params.shape, bursts, domain))
        for a, b in zip(low, high):
            assert np.all(a <= b)


class TestTranslationEquivariance:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_translated_pattern(self, seed):
        """Test de que trasladar ε, Z y ráfagas traslada p"""
        params, domain, bursts, eps, rng = random_case(seed)
        shape = params.shape
        offset = tuple(int(t) for t in rng.integers(0, shape.L, size=shape.D))

        def shift(cell):
            return tuple((c + t) % shape.L for c, t in zip(cell, offset))

        moved_domain = Explicit(frozenset(shift(c) for c in domain.sections))
        moved_bursts = [shift(b) for b in bursts]
        original = evolve(params, ErasurePattern.build(eps, shape, bursts, domain), steps=15)
        moved = evolve(params, ErasurePattern.build(eps, shape, moved_bursts, moved_domain), steps=15)
        for a, b in zip(original, moved):
            expected = translate(ScalarField(shape, a), offset).values
            assert np.max(np.abs(expected - b)) <= 1e-15


class TestScalarOracle:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_window_one_matches_scalar(self, seed):
        """Test de w=1 sin Z: cada sección sigue la recursión escalar"""
        rng = np.random.default_rng(seed)
        D = int(rng.integers(1, 4))
        L = int(rng.integers(2, 7))
        dl = int(rng.integers(3, 6))
        dr = int(rng.integers(dl + 1, 12))
        eps = float(rng.uniform(0.0, 1.0))
        params = EnsembleParams(dl, dr, L, D, 1)
        history = evolve(params, ErasurePattern(eps), steps=40)
        trajectory = scalar_de_trajectory(dl, dr, eps, 40)
        for values, x in zip(history, trajectory):
            assert np.max(np.abs(values - x)) <= 1e-14


class TestSeparableSum:
    @pytest.mark.parametrize("seed", SEEDS)
    def test_matches_naive(self, seed):
        """Test de la suma separable frente a la directa"""
        rng = np.random.default_rng(seed)
        D = int(rng.integers(1, 4))
        L = int(rng.integers(1, 9))
        w = int(rng.integers(1, L + 1))
        shape = GridShape(D, L)
        field = ScalarField(shape, rng.random(shape.dims))
        direction = FORWARD if rng.integers(0, 2) else BACKWARD
        fast = box_window_sum(field, w, direction).values
        slow = naive_box_window_sum(field, w, direction).values
        assert np.max(np.abs(fast - slow)) <= 1e-13

    @pytest.mark.parametrize("seed", SEEDS)
    def test_preserves_mean(self, seed):
        """Test de que la suma de ventana conserva la media del campo"""
        rng = np.random.default_rng(seed)
        D = int(rng.integers(1, 4))
        L = int(rng.integers(2, 9))
        w = int(rng.integers(1, L + 1))
        shape = GridShape(D, L)
        field = ScalarField(shape, rng.random(shape.dims))
        direction = FORWARD if rng.integers(0, 2) else BACKWARD
        averaged = box_window_sum(field, w, direction)
        assert averaged.mean() == pytest.approx(field.mean(), rel=1e-12)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
