import numpy as np
import pytest

from povm_support.bayes import DiscretePrior, bayes_cost
from povm_support.exceptions import InsufficientNearOptimalRestarts, SingularFisher, ValidationError
from povm_support.local import classical_fisher, weighted_cost
from povm_support.models import sld
from povm_support.operators import PAULI_X, PAULI_Z
from povm_support.optimize import (
    FrameParametrization,
    OptimizerConfig,
    descend,
    minimize_bayes,
    minimize_local,
    uniqueness_audit,
)
from povm_support.reduction import reduce_improving
from povm_support.subalgebra import BlockSpec, Ring, SubalgebraSpec

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])


def qubit_two_parameter_bound(J, W):
    """Closed-form optimum of Tr W F^-1 for two-parameter qubit models."""
    WJ = W @ np.linalg.inv(J)
    return np.trace(WJ) + 2 * np.sqrt(np.linalg.det(WJ))


def test_explicit_four_outcome_cost(qubit):
    tangent = qubit.tangent((0, 0))
    I2 = np.eye(2)
    M = [(I2 + PAULI_X) / 4, (I2 - PAULI_X) / 4, (I2 + PAULI_Z) / 4, (I2 - PAULI_Z) / 4]
    assert weighted_cost(I2, classical_fisher(M, tangent)) == 4.0
    assert qubit_two_parameter_bound(np.eye(2), np.eye(2)) == pytest.approx(4.0)


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValidationError):
            OptimizerConfig(0)
        with pytest.raises(ValidationError):
            OptimizerConfig(3, restarts=0)


class TestParametrization:
    @pytest.mark.parametrize(
        "blocks", [((Ring.REAL, 2, 1),), ((Ring.COMPLEX, 2, 1),), ((Ring.REAL, 1, 2), (Ring.COMPLEX, 2, 1))]
    )
    def test_candidates_are_valid(self, blocks, rng):
        spec = SubalgebraSpec(tuple(BlockSpec(*b) for b in blocks))
        param = FrameParametrization(spec, 4)
        M = param.povm(rng.standard_normal(param.size))
        assert M.size == 4 and M.completeness_deviation() <= 1e-10


def test_descend_quadratic():
    A = np.array([[3.0, 1.0], [1.0, 2.0]])
    x, fx = descend(lambda x: 0.5 * x @ A @ x - x[0], np.zeros(2), 200, 1e-10)
    assert np.allclose(x, np.linalg.solve(A, [1, 0]), atol=1e-6)


class TestMinimizeLocal:
    @pytest.mark.parametrize("s", [4, 5])
    def test_center(self, qubit, real_qubit_spec, s):
        rep = minimize_local(qubit, (0, 0), np.eye(2), real_qubit_spec, OptimizerConfig(s, restarts=6, seed=3))
        assert abs(rep.best_cost - 4.0) <= 1e-3
        assert min(rep.per_restart_costs) >= 4.0 - 1e-3
        assert rep.best_povm.size == s
        assert rep.best_cost == pytest.approx(weighted_cost(np.eye(2), rep.best_fisher), abs=1e-9)

    def test_matches_closed_form_off_center(self, qubit, real_qubit_spec):
        theta, W = (0.3, 0.2), np.diag([1.0, 2.0])
        rep = minimize_local(qubit, theta, W, real_qubit_spec, OptimizerConfig(5, restarts=6, seed=1))
        assert rep.best_cost == pytest.approx(qubit_two_parameter_bound(sld(qubit, theta).fisher, W), abs=1e-6)

    def test_two_outcomes_are_not_enough(self, qubit, real_qubit_spec):
        with pytest.raises(SingularFisher):
            minimize_local(qubit, (0, 0), np.eye(2), real_qubit_spec, OptimizerConfig(2, restarts=3))

    def test_quantum_floor_and_reduction(self, qubit, real_qubit_spec):
        theta, W = (-0.4, 0.1), np.diag([2.0, 1.0])
        rep = minimize_local(qubit, theta, W, real_qubit_spec, OptimizerConfig(6, restarts=4, seed=7))
        J = sld(qubit, theta).fisher
        assert rep.best_cost >= np.trace(W @ np.linalg.inv(J)) - 1e-6
        reduced = reduce_improving(rep.best_povm, real_qubit_spec, qubit.tangent(theta))
        assert reduced.povm.size <= 5
        assert weighted_cost(W, reduced.fisher_after) <= rep.best_cost + 1e-8


class TestUniquenessAudit:
    def test_center_fisher(self, qubit, real_qubit_spec):
        rep = minimize_local(qubit, (0, 0), np.eye(2), real_qubit_spec, OptimizerConfig(5, restarts=8, seed=11))
        assert uniqueness_audit(rep) <= 1e-4
        for k in rep.near_optimal:
            assert np.linalg.norm(rep.per_restart_fishers[k] - np.eye(2) / 2) <= 1e-4

    def test_single_restart(self, qubit, real_qubit_spec):
        rep = minimize_local(qubit, (0, 0), np.eye(2), real_qubit_spec, OptimizerConfig(4, restarts=1))
        with pytest.raises(InsufficientNearOptimalRestarts):
            uniqueness_audit(rep)

    def test_seed_independence(self, qubit, real_qubit_spec):
        theta, W = (0.3, 0.2), np.diag([1.0, 2.0])
        a = minimize_local(qubit, theta, W, real_qubit_spec, OptimizerConfig(5, restarts=4, seed=1))
        b = minimize_local(qubit, theta, W, real_qubit_spec, OptimizerConfig(5, restarts=4, seed=2))
        assert np.linalg.norm(a.best_fisher - b.best_fisher) <= 1e-4

    def test_deterministic(self, qubit, real_qubit_spec):
        cfg = OptimizerConfig(4, restarts=2, seed=5)
        a = minimize_local(qubit, (0.1, 0.1), np.eye(2), real_qubit_spec, cfg)
        b = minimize_local(qubit, (0.1, 0.1), np.eye(2), real_qubit_spec, cfg)
        assert a.per_restart_costs == b.per_restart_costs


class TestMinimizeBayes:
    def test_two_orthogonal_states(self):
        prior = DiscretePrior([[0.0], [1.0]], [0.5, 0.5], [KET0, KET1])
        rep = minimize_bayes(prior, SubalgebraSpec.full(2), OptimizerConfig(2, restarts=4))
        assert rep.best_cost == pytest.approx(0.0, abs=1e-6)

    def test_point_prior(self, real_qubit_spec, qubit):
        prior = DiscretePrior([[0.2, 0.2]], [1.0], [qubit.state((0.2, 0.2))])
        for s in (1, 3):
            assert minimize_bayes(prior, real_qubit_spec, OptimizerConfig(s, restarts=2)).best_cost == pytest.approx(0, abs=1e-12)

    def test_monotone_history(self, disk, real_qubit_spec):
        rep = minimize_bayes(disk, real_qubit_spec, OptimizerConfig(4, restarts=3, seed=2))
        assert np.all(np.diff(rep.cost_history) <= 1e-12)
        assert rep.best_cost == pytest.approx(bayes_cost(rep.best_povm, disk), abs=1e-9)

    def test_support_three_suffices(self, disk, real_qubit_spec):
        three = minimize_bayes(disk, real_qubit_spec, OptimizerConfig(3, restarts=8, seed=0))
        six = minimize_bayes(disk, real_qubit_spec, OptimizerConfig(6, restarts=8, seed=0))
        assert abs(three.best_cost - six.best_cost) <= 1e-4
