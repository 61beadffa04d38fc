import numpy as np
import pytest

from slide_ising import CouplingMatrix, exact_distribution, gibbs_sample, sample_exact


class TestSampleExact:
    def test_uniform_pair_uncorrelated(self):
        ds = sample_exact(exact_distribution(CouplingMatrix.zeros(2)), 4000, seed=3)
        assert abs(ds.moments()[0, 1]) <= 0.08

    def test_ln2_moment(self, ln2_pair):
        ds = sample_exact(exact_distribution(ln2_pair), 100_000, seed=1)
        assert ds.moments()[0, 1] == pytest.approx(0.6, abs=0.01)

    def test_same_seed_same_data(self, ln2_pair):
        dist = exact_distribution(ln2_pair)
        assert sample_exact(dist, 50, 9) == sample_exact(dist, 50, 9)

    def test_rejects_empty(self, ln2_pair):
        with pytest.raises(ValueError):
            sample_exact(exact_distribution(ln2_pair), 0, 0)


class TestGibbs:
    def test_zero_coupling_uniform(self):
        ds = gibbs_sample(CouplingMatrix.zeros(3), 20_000, burn_in=10, thin=1, seed=2)
        m = ds.moments()
        assert np.all(np.abs(m - np.eye(3)) < 0.03)
        assert abs(ds.spins.mean()) < 0.02

    def test_single_sweep_boundary(self):
        ds = gibbs_sample(CouplingMatrix.zeros(4), 1, burn_in=0, thin=1, seed=0)
        assert ds.spins.shape == (1, 4)

    def test_deterministic(self):
        J = CouplingMatrix.from_edges(3, [(0, 1, 0.7), (1, 2, -0.4)])
        a = gibbs_sample(J, 300, burn_in=50, thin=2, seed=11)
        b = gibbs_sample(J, 300, burn_in=50, thin=2, seed=11)
        assert np.array_equal(a.spins, b.spins)

    def test_moments_match_enumeration(self):
        rng = np.random.default_rng(5)
        A = np.triu(rng.uniform(-1, 1, (4, 4)), 1)
        J = CouplingMatrix(A + A.T)
        ds = gibbs_sample(J, 20_000, burn_in=500, thin=10, seed=5)
        assert np.max(np.abs(ds.moments() - exact_distribution(J).moments())) <= 0.03

    @pytest.mark.parametrize("kw", [{"n": 0}, {"n": 5, "thin": 0}, {"n": 5, "burn_in": -1}])
    def test_invalid_arguments(self, kw):
        with pytest.raises(ValueError):
            gibbs_sample(CouplingMatrix.zeros(2), **kw)
