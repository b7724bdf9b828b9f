import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from povm_support.bayes import DiscretePrior, bayes_cost, disk_prior, h_cost, optimal_bayes_estimator
from povm_support.exceptions import DimensionMismatch, ValidationError
from povm_support.models import qubit_xz
from povm_support.operators import random_povm
from povm_support.reduction import merge_outcomes
from povm_support.subalgebra import project

from conftest import random_psd

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])


@pytest.fixture
def two_point():
    return DiscretePrior([[0.0], [1.0]], [0.5, 0.5], [KET0, KET1], W=[[1.0]])


def random_prior(rng, K=6, d=2, dim=3):
    thetas = rng.standard_normal((K, d))
    weights = rng.uniform(0.1, 1, K)
    rhos = []
    for _ in range(K):
        R = random_psd(rng, dim)
        rhos.append(R / np.trace(R).real)
    Ws = []
    for _ in range(K):
        G = rng.standard_normal((d, d))
        Ws.append(G @ G.T + 0.1 * np.eye(d))
    return DiscretePrior(thetas, weights / weights.sum(), rhos, np.stack(Ws))


class TestPrior:
    def test_weights_must_normalize(self):
        with pytest.raises(ValidationError):
            DiscretePrior([[0.0], [1.0]], [0.5, 0.6], [KET0, KET1])

    def test_states_must_be_densities(self):
        with pytest.raises(ValidationError):
            DiscretePrior([[0.0]], [1.0], [2 * KET0])

    def test_disk_prior(self, disk):
        assert disk.size == 25 and disk.d == 2
        assert disk.weights.sum() == pytest.approx(1.0)
        assert np.all(np.linalg.norm(disk.thetas, axis=1) < 1)
        assert np.allclose(disk.mean, 0, atol=1e-12)


class TestH:
    def test_one_point_prior(self):
        prior = DiscretePrior([[0.3, 0.1]], [1.0], [qubit_xz().state((0.3, 0.1))])
        assert h_cost(np.eye(2), [0.3, 0.1], prior) == 0

    def test_zero_operator(self, two_point):
        assert h_cost(np.zeros((2, 2)), [0.7], two_point) == 0

    def test_two_point_value(self, two_point):
        assert h_cost(np.eye(2), [0.5], two_point) == pytest.approx(0.25, abs=1e-15)

    def test_dimension_mismatch(self, two_point):
        with pytest.raises(DimensionMismatch):
            h_cost(np.eye(3), [0.5], two_point)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**31), st.floats(0, 10))
    def test_homogeneity(self, seed, t):
        rng = np.random.default_rng(seed)
        prior = random_prior(rng)
        X, v = random_psd(rng, 3), rng.standard_normal(2)
        h = h_cost(X, v, prior)
        assert h >= 0
        assert abs(h_cost(t * X, v, prior) - t * h) <= 1e-10 * max(1.0, t * h)


class TestEstimator:
    def test_distinguishing(self, two_point):
        assert np.allclose(optimal_bayes_estimator([KET0, KET1], two_point), [[0.0], [1.0]])

    def test_uninformative(self, two_point):
        assert np.allclose(optimal_bayes_estimator([np.eye(2)], two_point), [[0.5]])

    def test_posterior_mean_with_identity_weight(self, disk, rng):
        M = random_povm(2, 4, rng)
        est = optimal_bayes_estimator(M, disk)
        for Mx, v in zip(M, est):
            post = disk.weights * np.einsum("kab,ba->k", disk.rhos, Mx).real
            assert np.allclose(v, post @ disk.thetas / post.sum(), atol=1e-12)

    def test_global_minimizer(self, rng):
        prior = random_prior(rng)
        M = random_povm(3, 5, rng)
        est = optimal_bayes_estimator(M, prior)
        for Mx, v in zip(M, est):
            base = h_cost(Mx, v, prior)
            for _ in range(50):
                assert h_cost(Mx, v + 0.1 * rng.standard_normal(2), prior) >= base - 1e-12

    def test_zero_probability_outcome(self, two_point):
        est = optimal_bayes_estimator([KET0, KET1, np.zeros((2, 2))], two_point)
        assert est[2] == pytest.approx([0.5])


class TestBayesCost:
    def test_distinguishing(self, two_point):
        assert bayes_cost([KET0, KET1], two_point) == 0

    def test_prior_variance(self, two_point):
        assert bayes_cost([np.eye(2)], two_point) == pytest.approx(0.25)

    def test_explicit_estimator(self, two_point):
        assert bayes_cost([KET0, KET1], two_point, [[1.0], [0.0]]) == pytest.approx(1.0)

    def test_permutation_invariance(self, rng):
        prior = random_prior(rng)
        M = random_povm(3, 7, rng)
        assert bayes_cost(M, prior) == bayes_cost(M.permuted(rng.permutation(7)), prior)

    def test_merge_monotone(self, rng):
        for _ in range(50):
            prior = random_prior(rng)
            M = random_povm(3, 6, rng)
            i, j = rng.choice(6, 2, replace=False)
            assert bayes_cost(merge_outcomes(M, i, j), prior) >= bayes_cost(M, prior) - 1e-10

    def test_projection_invariance(self, disk, real_qubit_spec, rng):
        for _ in range(20):
            M = random_povm(2, 5, rng)
            projected = [project(real_qubit_spec, E) for E in M]
            assert abs(bayes_cost(projected, disk) - bayes_cost(M, disk)) <= 1e-9

    def test_dimension_mismatch(self, two_point):
        with pytest.raises(DimensionMismatch):
            bayes_cost([KET0, KET1], two_point, [[0.0, 1.0], [1.0, 0.0]])
