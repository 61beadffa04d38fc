import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slide_ising import CouplingMatrix, Dataset
from slide_ising.pseudolikelihood import (NodeObjective, maximize_on_support, pl_gradient, pl_hessian,
                                          pl_value)

from conftest import draw


def naive_pl(J_i, spins, i):
    """Row-by-row mean log conditional, written without vectorization."""
    total = 0.0
    for z in spins.astype(float):
        h = sum(J_i[j] * z[j] for j in range(len(z)) if j != i)
        total += -math.log1p(math.exp(-2.0 * z[i] * h))
    return total / len(spins)


def golden_max(f, lo, hi, tol=1e-10):
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    while b - a > tol:
        if f(c) > f(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    return 0.5 * (a + b)


@pytest.fixture(scope="module")
def small_data():
    rng = np.random.default_rng(0)
    A = np.triu(rng.uniform(-0.6, 0.6, (6, 6)), 1)
    return draw(CouplingMatrix(A + A.T), 400, seed=1)


class TestValue:
    def test_zero_is_minus_log2(self, small_data):
        assert pl_value(np.zeros(6), small_data, 2) == pytest.approx(-math.log(2))

    def test_single_sample_closed_form(self):
        ds = Dataset(np.array([[1, 1]]))
        assert pl_value(np.array([0.0, 0.5]), ds, 0) == pytest.approx(-0.313261687518, abs=1e-9)

    def test_global_flip_invariance(self, small_data, rng):
        J_i = rng.normal(size=6)
        J_i[3] = 0
        flipped = Dataset(-small_data.spins)
        assert pl_value(J_i, flipped, 3) == pytest.approx(pl_value(J_i, small_data, 3), rel=1e-14)

    def test_matches_naive_sum(self, small_data, rng):
        J_i = rng.normal(size=6)
        J_i[1] = 0
        assert pl_value(J_i, small_data, 1) == pytest.approx(naive_pl(J_i, small_data.spins, 1), rel=1e-12)

    def test_nonzero_self_coupling_rejected(self, small_data):
        with pytest.raises(ValueError):
            pl_value(np.ones(6), small_data, 0)


class TestDerivatives:
    def test_gradient_at_zero_is_covariance(self, small_data):
        cov = small_data.moments()[0].copy()
        cov[0] = 0.0
        np.testing.assert_allclose(pl_gradient(np.zeros(6), small_data, 0), cov, atol=1e-14)

    def test_copied_column_has_unit_gradient(self):
        z = np.random.default_rng(2).choice([-1, 1], size=(50, 3))
        z[:, 2] = z[:, 0]
        assert pl_gradient(np.zeros(3), Dataset(z), 0)[2] == pytest.approx(1.0)

    def test_hessian_at_zero(self, small_data):
        S = [1, 3, 4]
        M = small_data.moments()
        np.testing.assert_allclose(pl_hessian(np.zeros(6), small_data, 0, S), -M[np.ix_(S, S)], atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1))
    def test_concave_along_lines(self, seed):
        rng = np.random.default_rng(seed)
        spins = rng.choice([-1, 1], size=(40, 5))
        obj = NodeObjective(Dataset(spins), 0)
        a, b = rng.normal(size=5), rng.normal(size=5)
        a[0] = b[0] = 0
        t = rng.uniform(0.1, 0.9)
        mid = obj.value(t * a + (1 - t) * b)
        assert mid >= t * obj.value(a) + (1 - t) * obj.value(b) - 1e-12
        H = obj.hessian(a, range(1, 5))
        assert np.linalg.eigvalsh(H).max() <= 1e-12


class TestMaximize:
    def test_empty_support(self, small_data):
        sol = maximize_on_support(small_data, 0, ())
        assert sol.coefficients.size == 0
        assert sol.pl_value == pytest.approx(-math.log(2))
        np.testing.assert_allclose(sol.gradient[1:], small_data.moments()[0, 1:])

    def test_pair_estimate_against_golden_section(self):
        J = CouplingMatrix.from_edges(2, [(0, 1, 0.5)])
        ds = draw(J, 100_000, seed=4)
        sol = maximize_on_support(ds, 0, {1})
        obj = NodeObjective(ds, 0)
        ref = golden_max(lambda c: obj.value(np.array([0.0, c])), -5, 5)
        assert sol.converged and not sol.capped
        assert sol.coefficients[0] == pytest.approx(ref, abs=1e-6)
        assert sol.coefficients[0] == pytest.approx(0.5, abs=0.02)

    def test_stationary_on_support(self, small_data):
        sol = maximize_on_support(small_data, 2, {0, 4, 5})
        assert sol.converged
        assert np.max(np.abs(sol.gradient[[0, 4, 5]])) <= 1e-8

    def test_separation_hits_cap(self):
        z = np.random.default_rng(3).choice([-1, 1], size=(60, 3))
        z[:, 1] = z[:, 0]
        sol = maximize_on_support(Dataset(z), 0, {1}, cap=15.0)
        assert sol.capped
        assert sol.coefficients[0] == 15.0

    def test_warm_start_same_optimum(self, small_data):
        cold = maximize_on_support(small_data, 1, {0, 2, 3})
        warm = maximize_on_support(small_data, 1, {0, 2, 3}, warm_start=np.full(6, 0.3))
        np.testing.assert_allclose(warm.coefficients, cold.coefficients, atol=1e-7)

    def test_nested_supports_monotone(self, small_data):
        small = maximize_on_support(small_data, 0, {1, 2})
        big = maximize_on_support(small_data, 0, {1, 2, 5})
        assert big.pl_value >= small.pl_value - 1e-12

    def test_self_in_support(self, small_data):
        with pytest.raises(ValueError):
            maximize_on_support(small_data, 0, {0, 1})

    def test_support_larger_than_n(self):
        ds = Dataset(np.array([[1, 1, -1, 1], [1, -1, 1, 1]]))
        with pytest.raises(ValueError):
            maximize_on_support(ds, 0, {1, 2, 3})
