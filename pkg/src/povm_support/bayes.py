"""Bayesian average cost over a finite prior."""

import math

import numpy as np

from .exceptions import DimensionMismatch, ValidationError
from .local import P_CUT, check_weight
from .models import StateModel, qubit_xz, tensor_power
from .operators import Povm, as_square, check_density, validate_povm

PRIOR_TOL = 1e-10


class DiscretePrior:
    """Finite prior ``{(theta_k, pi_k, W_k, rho_k)}``.

    Parameters
    ----------
    thetas : array of shape (K, d)
    weights : array of shape (K,), positive, summing to one
    rhos : array of shape (K, n, n) of density matrices
    W : weight matrices, shape (K, d, d), a single (d, d) matrix shared by all
        points, or None for the identity.
    """

    def __init__(self, thetas, weights, rhos, W=None):
        thetas = np.asarray(thetas, dtype=float)
        if thetas.ndim == 1:
            thetas = thetas[:, None]
        weights = np.asarray(weights, dtype=float).reshape(-1)
        K, d = thetas.shape
        if weights.shape != (K,) or len(rhos) != K or K == 0:
            raise DimensionMismatch("thetas, weights and rhos must have the same nonzero length")
        if np.any(weights <= 0):
            raise ValidationError("prior weights must be positive")
        if abs(weights.sum() - 1.0) > PRIOR_TOL:
            raise ValidationError(f"prior weights sum to {weights.sum():.12g}, not 1")
        rhos = np.stack([check_density(as_square(r)) for r in rhos])
        if W is None:
            W = np.eye(d)
        W = np.asarray(W, dtype=float)
        if W.ndim <= 2:
            W = np.broadcast_to(check_weight(W, d), (K, d, d))
        elif W.shape[0] != K:
            raise DimensionMismatch("one weight matrix per prior point is required")
        W = np.stack([check_weight(Wk, d) for Wk in W])
        self.thetas, self.weights, self.rhos, self.W = thetas, weights, rhos, W
        for arr in (thetas, weights, rhos, W):
            arr.setflags(write=False)

    @classmethod
    def from_model(cls, model: StateModel, thetas, weights, W=None):
        thetas = np.asarray(thetas, dtype=float)
        return cls(thetas, weights, [model.state(t) for t in thetas], W)

    @property
    def size(self):
        return self.thetas.shape[0]

    @property
    def d(self):
        return self.thetas.shape[1]

    @property
    def dim(self):
        return self.rhos.shape[1]

    @property
    def mean(self):
        return self.weights @ self.thetas

    def __repr__(self):
        return f"DiscretePrior(K={self.size}, d={self.d}, dim={self.dim})"


def disk_prior(n=5, copies=1, W=None):
    """Uniform prior on the unit disk for the real qubit family, on an n x n polar grid.

    Points sit at the centres of the polar cells, weighted by cell area.
    """
    radii = (np.arange(n) + 0.5) / n
    areas = ((np.arange(1, n + 1) / n) ** 2 - (np.arange(n) / n) ** 2) / 2
    angles = 2 * np.pi * (np.arange(n) + 0.5) / n
    thetas, weights = [], []
    for r, area in zip(radii, areas):
        for phi in angles:
            thetas.append((r * np.cos(phi), r * np.sin(phi)))
            weights.append(area)
    weights = np.asarray(weights) / np.sum(weights)
    model = qubit_xz() if copies == 1 else tensor_power(qubit_xz(), copies)
    return DiscretePrior.from_model(model, thetas, weights, W)


def _check_dim(prior, dim):
    if dim != prior.dim:
        raise DimensionMismatch(f"operator dimension {dim} does not match prior states of dimension {prior.dim}")


def prior_probabilities(elements, prior):
    """``tr(rho_k M_x)`` as an ``(s, K)`` array."""
    ops = np.asarray(elements, dtype=complex)
    return np.einsum("kab,xba->xk", prior.rhos, ops).real


def quadratic_losses(v, prior):
    """``(v - theta_k)^T W_k (v - theta_k)`` for every prior point."""
    diff = np.asarray(v, dtype=float).reshape(1, -1) - prior.thetas
    return np.einsum("ki,kij,kj->k", diff, prior.W, diff)


def h_cost(X, v, prior: DiscretePrior):
    """Cost contribution ``sum_k pi_k (v-theta_k)^T W_k (v-theta_k) tr(rho_k X)``."""
    X = as_square(X)
    _check_dim(prior, X.shape[0])
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != prior.d:
        raise DimensionMismatch(f"estimate has {v.size} entries, prior has d={prior.d}")
    p = prior_probabilities(X[None], prior)[0]
    return float(np.sum(prior.weights * quadratic_losses(v, prior) * p))


def _as_povm(M):
    return M if isinstance(M, Povm) else validate_povm(M)


def optimal_bayes_estimator(M, prior: DiscretePrior):
    """Per-outcome minimizers of ``v -> h[M_x, v]``, as an ``(s, d)`` array.

    Each row solves ``(sum_k q_k W_k) v = sum_k q_k W_k theta_k`` with
    ``q_k = pi_k tr(rho_k M_x)``; outcomes of negligible probability get the
    prior mean.
    """
    M = _as_povm(M)
    _check_dim(prior, M.dim)
    return _bayes_estimates(prior_probabilities(M.elements, prior), prior)


def _bayes_estimates(probs, prior):
    q = probs * prior.weights[None, :]
    A = np.einsum("xk,kij->xij", q, prior.W)
    b = np.einsum("xk,kij,kj->xi", q, prior.W, prior.thetas)
    out = np.empty((probs.shape[0], prior.d))
    for x in range(probs.shape[0]):
        if q[x].sum() <= P_CUT:
            out[x] = prior.mean
        else:
            out[x] = np.linalg.solve(A[x], b[x])
    return out


def bayes_cost(M, prior: DiscretePrior, estimates=None):
    """Average cost ``sum_x h[M_x, est(x)]``; the optimal estimator when ``estimates`` is None."""
    M = _as_povm(M)
    _check_dim(prior, M.dim)
    if estimates is None:
        estimates = optimal_bayes_estimator(M, prior)
    estimates = np.asarray(estimates, dtype=float)
    if estimates.ndim == 1 and prior.d == 1:
        estimates = estimates[:, None]
    if estimates.shape != (M.size, prior.d):
        raise DimensionMismatch(f"estimator has shape {estimates.shape}, expected {(M.size, prior.d)}")
    return math.fsum(h_cost(Mx, v, prior) for Mx, v in zip(M.elements, estimates))
