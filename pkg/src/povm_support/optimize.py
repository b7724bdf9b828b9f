"""Multi-restart search for optimal measurements of bounded support.

Candidate POVMs are built from ``s`` direction vectors ``u_x`` in the block
coordinates of a subalgebra: ``B_x = (+)_b I_m (x) u_x^b u_x^b*`` and
``M_x = T^{-1/2} B_x T^{-1/2}`` with ``T = sum_x B_x``.  Every candidate is
therefore a valid POVM in the subalgebra; for single-block subalgebras
with at least ``n`` outcomes each element is a multiple of a minimal
projection.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .bayes import DiscretePrior, _bayes_estimates, bayes_cost
from .exceptions import InsufficientNearOptimalRestarts, SingularFisher, ValidationError
from .local import P_CUT, SINGULAR_CUT, check_weight, classical_fisher, weighted_cost
from .models import StateModel
from .operators import Povm, inv_sqrt_psd, validate_povm
from .subalgebra import Ring, SubalgebraSpec, sufficiency_residual

logger = logging.getLogger(__name__)

FRAME_REG = 1e-12
FD_STEP = 1e-6
NEAR_OPTIMAL_RTOL = 1e-6
BAYES_INNER_ITERS = 50


@dataclass
class OptimizerConfig:
    support_size: int
    restarts: int = 32
    max_iters: int = 2000
    grad_tol: float = 1e-9
    seed: int = 0

    def __post_init__(self):
        if int(self.support_size) != self.support_size or self.support_size < 1:
            raise ValidationError("support_size must be a positive integer")
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise ValidationError("restarts must be a positive integer")
        if self.max_iters < 1 or not self.grad_tol > 0:
            raise ValidationError("max_iters must be positive and grad_tol strictly positive")


@dataclass
class OptimizationReport:
    best_cost: float
    best_povm: Povm
    per_restart_costs: List[float]
    best_fisher: Optional[np.ndarray] = None
    best_estimates: Optional[np.ndarray] = None
    per_restart_fishers: List[np.ndarray] = field(default_factory=list)
    fisher_spread: Optional[float] = None
    near_optimal: List[int] = field(default_factory=list)
    cost_history: List[float] = field(default_factory=list)
    mode: str = "local"


class FrameParametrization:
    """Map flat real parameter vectors to POVMs of a subalgebra, in its adapted basis.

    Each outcome gets ``rank`` direction vectors per block.  The rank is one
    unless there are too few outcomes for the frame operator ``T`` to be
    invertible, in which case it is raised just enough.
    """

    def __init__(self, spec: SubalgebraSpec, support_size: int):
        spec.require_supported()
        self.spec = spec
        self.s = support_size
        self.rank = -(-max(b.n for b in spec.blocks) // support_size)
        self._slots = []  # (param offset, block size, complex?, [row offsets of the copies])
        pos = 0
        for b, off in zip(spec.blocks, spec.offsets()):
            cplx = b.ring is Ring.COMPLEX
            self._slots.append((pos, b.n, cplx, [off + k * b.n for k in range(b.m)]))
            pos += (2 if cplx else 1) * b.n * self.rank
        self.per_outcome = pos
        self.columns = sum(b.m for b in spec.blocks) * self.rank
        self.size = self.s * self.per_outcome

    def frames(self, params):
        """Stack of ``Y_x`` with ``B_x = Y_x Y_x^*``, shape ``(s, dim, columns)``."""
        P = params.reshape(self.s, self.per_outcome)
        r = self.rank
        Y = np.zeros((self.s, self.spec.ambient_dim, self.columns), dtype=complex)
        col = 0
        for pos, n, cplx, rows in self._slots:
            u = P[:, pos: pos + n * r].reshape(self.s, n, r)
            if cplx:
                u = u + 1j * P[:, pos + n * r: pos + 2 * n * r].reshape(self.s, n, r)
            for row in rows:
                Y[:, row: row + n, col: col + r] = u
                col += r
        return Y

    def normalized(self, params, reg=FRAME_REG):
        """``Z_x = T^{-1/2} Y_x`` so that ``M_x = Z_x Z_x^*``."""
        Y = self.frames(params)
        T = np.einsum("xac,xbc->ab", Y, Y.conj())
        S = inv_sqrt_psd(T + reg * np.eye(T.shape[0]))
        return np.einsum("ab,xbc->xac", S, Y)

    def povm(self, params):
        Y = self.frames(params)
        B = np.einsum("xac,xbc->xab", Y, Y.conj())
        S = inv_sqrt_psd(B.sum(axis=0))
        elements = [self.spec.from_adapted(S @ Bx @ S) for Bx in B]
        return validate_povm([0.5 * (E + E.conj().T) for E in elements])


def _expect(Z, ops):
    """``Re tr(Z_x^* O_k Z_x)`` for every outcome ``x`` and operator ``k``: shape ``(s, K)``."""
    return np.einsum("xac,kab,xbc->xk", Z.conj(), ops, Z).real


def fd_gradient(f, x, step=FD_STEP):
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(x.size):
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
        e[i] = 0.0
    return g


def descend(f, x0, max_iters, grad_tol, step=FD_STEP):
    """Gradient descent with backtracking step control and BFGS preconditioning.

    Gradients are central finite differences.  Stops when the gradient falls
    below ``grad_tol``, when no step decreases ``f``, or after ``max_iters``.
    """
    x = np.array(x0, dtype=float)
    fx = f(x)
    if not np.isfinite(fx):
        return x, fx
    g = fd_gradient(f, x, step)
    H = np.eye(x.size)
    for _ in range(max_iters):
        if not np.all(np.isfinite(g)) or np.max(np.abs(g)) < grad_tol:
            break
        p = -H @ g
        slope = g @ p
        if slope >= 0:
            H = np.eye(x.size)
            p, slope = -g, -(g @ g)
        t = 1.0
        while t > 1e-20:
            x_new = x + t * p
            f_new = f(x_new)
            if np.isfinite(f_new) and f_new <= fx + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break
        if not f_new < fx:
            break
        g_new = fd_gradient(f, x_new, step)
        sk, yk = x_new - x, g_new - g
        sy = sk @ yk
        if sy > 1e-12 * np.linalg.norm(sk) * np.linalg.norm(yk):
            rho = 1.0 / sy
            V = np.eye(x.size) - rho * np.outer(sk, yk)
            H = V @ H @ V.T + rho * np.outer(sk, sk)
        x, fx, g = x_new, f_new, g_new
    return x, fx


def _restart_rngs(config):
    return [np.random.default_rng(ss) for ss in np.random.SeedSequence(config.seed).spawn(config.restarts)]


def _near_optimal(costs, best, rtol=NEAR_OPTIMAL_RTOL):
    band = rtol * max(1.0, abs(best))
    return [k for k, c in enumerate(costs) if np.isfinite(c) and c <= best + band]


def _spread(fishers):
    if len(fishers) < 2:
        return 0.0
    return max(
        float(np.linalg.norm(fishers[i] - fishers[j]))
        for i in range(len(fishers))
        for j in range(i + 1, len(fishers))
    )


def minimize_local(model: StateModel, theta0, W, spec: SubalgebraSpec, config: OptimizerConfig) -> OptimizationReport:
    """Minimize ``Tr(W F[M]^{-1})`` over POVMs with ``config.support_size`` outcomes."""
    tangent = model.tangent(theta0)
    W = check_weight(W, tangent.d)
    if config.support_size < tangent.d + 1:
        logger.warning("support size %d < d+1 = %d: Fisher matrix will be singular", config.support_size, tangent.d + 1)
    res = sufficiency_residual(spec, [tangent.rho, *tangent.drho], samples=16, rng=0)
    if res > 1e-8:
        warnings.warn(f"subalgebra does not look locally sufficient (residual {res:.3e})", RuntimeWarning, stacklevel=2)

    param = FrameParametrization(spec, config.support_size)
    ops = np.stack([spec.to_adapted(O) for O in (tangent.rho, *tangent.drho)])

    def fisher(params):
        stats = _expect(param.normalized(params), ops)
        p, a = stats[:, 0], stats[:, 1:]
        keep = p > P_CUT
        a = np.where(keep[:, None], a, 0.0)
        return (a / np.where(keep, p, 1.0)[:, None]).T @ a

    def cost(params):
        F = fisher(params)
        if np.linalg.eigvalsh(F)[0] <= SINGULAR_CUT:
            return np.inf
        return float(np.trace(np.linalg.solve(F, W)))

    costs, finals = [], []
    for k, rng in enumerate(_restart_rngs(config)):
        x0 = rng.standard_normal(param.size)
        for _ in range(10):
            if np.isfinite(cost(x0)):
                break
            x0 = rng.standard_normal(param.size)
        x, fx = descend(cost, x0, config.max_iters, config.grad_tol)
        costs.append(float(fx))
        finals.append(x)
        logger.debug("local restart %d: cost %.12g", k, fx)
    if not np.any(np.isfinite(costs)):
        raise SingularFisher(message="classical Fisher matrix singular in every restart")

    fishers = []
    for x, c in zip(finals, costs):
        fishers.append(classical_fisher(param.povm(x), tangent) if np.isfinite(c) else None)
    best = int(np.argmin(costs))
    best_povm = param.povm(finals[best])
    best_fisher = classical_fisher(best_povm, tangent)
    near = _near_optimal(costs, costs[best])
    return OptimizationReport(
        best_cost=weighted_cost(W, best_fisher),
        best_povm=best_povm,
        per_restart_costs=costs,
        best_fisher=best_fisher,
        per_restart_fishers=fishers,
        fisher_spread=_spread([fishers[k] for k in near]),
        near_optimal=near,
        mode="local",
    )


def minimize_bayes(prior: DiscretePrior, spec: SubalgebraSpec, config: OptimizerConfig) -> OptimizationReport:
    """See-saw minimization of the Bayes cost over POVMs with ``config.support_size`` outcomes.

    Alternates the closed-form estimator update with a descent phase on the
    measurement for fixed estimates; the cost recorded after each estimator
    update never increases.
    """
    res = sufficiency_residual(spec, list(prior.rhos), samples=16, rng=0)
    if res > 1e-8:
        warnings.warn(f"subalgebra does not look sufficient for the prior (residual {res:.3e})", RuntimeWarning, stacklevel=2)
    param = FrameParametrization(spec, config.support_size)
    rhos = np.stack([spec.to_adapted(r) for r in prior.rhos])
    diffs = prior.thetas[None, :, :]

    def probabilities(params):
        return _expect(param.normalized(params), rhos)

    def losses(est):
        dev = est[:, None, :] - diffs
        return np.einsum("xki,kij,xkj->xk", dev, prior.W, dev) * prior.weights[None, :]

    costs, finals, histories, estimates = [], [], [], []
    for k, rng in enumerate(_restart_rngs(config)):
        x = rng.standard_normal(param.size)
        history = []
        est = None
        for _ in range(config.max_iters):
            est = _bayes_estimates(probabilities(x), prior)
            L = losses(est)
            c = float(np.sum(probabilities(x) * L))
            if history and c > history[-1] + 1e-12:
                raise AssertionError(f"see-saw cost increased from {history[-1]!r} to {c!r}")
            if history and history[-1] - c < config.grad_tol:
                history.append(c)
                break
            history.append(c)
            x, _ = descend(lambda y: float(np.sum(probabilities(y) * L)), x, BAYES_INNER_ITERS, config.grad_tol)
        costs.append(history[-1])
        finals.append(x)
        histories.append(history)
        estimates.append(est)
        logger.debug("bayes restart %d: cost %.12g after %d updates", k, history[-1], len(history))

    best = int(np.argmin(costs))
    best_povm = param.povm(finals[best])
    return OptimizationReport(
        best_cost=bayes_cost(best_povm, prior, estimates[best]),
        best_povm=best_povm,
        per_restart_costs=costs,
        best_estimates=estimates[best],
        near_optimal=_near_optimal(costs, costs[best]),
        cost_history=histories[best],
        mode="bayes",
    )


def uniqueness_audit(report: OptimizationReport, rtol=NEAR_OPTIMAL_RTOL) -> float:
    """Largest Frobenius distance between Fisher matrices of near-optimal restarts.

    Optimal Fisher matrices are unique, so a large spread means at least one
    restart stopped short of the optimum.
    """
    if report.mode != "local":
        raise ValidationError("the uniqueness audit applies to local-mode reports")
    near = _near_optimal(report.per_restart_costs, min(report.per_restart_costs), rtol)
    if len(near) < 2:
        raise InsufficientNearOptimalRestarts(
            f"{len(near)} restart(s) within the near-optimal band; at least two are needed"
        )
    return _spread([report.per_restart_fishers[k] for k in near])
