"""Classical Fisher information and locally unbiased estimation at a point."""

import math
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionMismatch, SingularFisher, ValidationError
from .models import Tangent
from .operators import Povm, validate_povm

P_CUT = 1e-12
SINGULAR_CUT = 1e-10
WEIGHT_CUT = 1e-12


def check_weight(W, d=None):
    """Validate a real symmetric positive definite weight matrix."""
    W = np.array(W, dtype=float)
    if W.ndim == 0:
        W = W.reshape(1, 1)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise DimensionMismatch(f"weight must be square, got shape {W.shape}")
    if d is not None and W.shape[0] != d:
        raise DimensionMismatch(f"weight is {W.shape[0]}x{W.shape[0]}, expected {d}x{d}")
    if np.max(np.abs(W - W.T)) > 1e-10:
        raise ValidationError("weight matrix is not symmetric")
    W = 0.5 * (W + W.T)
    lam = float(np.linalg.eigvalsh(W)[0])
    if lam < WEIGHT_CUT:
        raise ValidationError(f"weight matrix is not positive definite (min eigenvalue {lam:.3e})")
    return W


def _as_povm(M):
    return M if isinstance(M, Povm) else validate_povm(M)


def _check_tangent(M, tangent):
    if tangent.rho.shape[0] != M.dim:
        raise DimensionMismatch(f"POVM acts on dimension {M.dim}, state on {tangent.rho.shape[0]}")


def outcome_statistics(elements, tangent: Tangent):
    """Probabilities ``tr(rho M_x)`` and derivative slopes ``tr(d_i rho M_x)``.

    Returns arrays of shapes ``(s,)`` and ``(s, d)``.
    """
    ops = np.asarray(elements, dtype=complex)
    p = np.einsum("ab,xba->x", tangent.rho, ops).real
    a = np.einsum("iab,xba->xi", np.asarray(tangent.drho), ops).real
    return p, a


def g_contribution(X, tangent: Tangent, p_cut=P_CUT):
    """Rank-one Fisher contribution ``a a^T / p`` of a single PSD operator.

    Zero when ``tr(rho X) <= p_cut``.
    """
    p, a = outcome_statistics(np.asarray(X, dtype=complex)[None], tangent)
    if p[0] <= p_cut:
        return np.zeros((tangent.d, tangent.d))
    return np.outer(a[0], a[0]) / p[0]


def _fsum_matrix(stack):
    s, d, _ = stack.shape
    return np.array([[math.fsum(stack[:, i, j]) for j in range(d)] for i in range(d)])


def g_stack(elements, tangent, p_cut=P_CUT):
    p, a = outcome_statistics(elements, tangent)
    keep = p > p_cut
    safe = np.where(keep, p, 1.0)
    return np.where(keep[:, None, None], a[:, :, None] * a[:, None, :] / safe[:, None, None], 0.0)


def classical_fisher(M, tangent: Tangent):
    """Classical Fisher matrix ``sum_x g[M_x]``.

    Entries are accumulated with :func:`math.fsum`, so the result does not
    depend on the order of the outcomes.
    """
    M = _as_povm(M)
    _check_tangent(M, tangent)
    return _fsum_matrix(g_stack(M.elements, tangent))


def require_invertible(F, cut=SINGULAR_CUT):
    lam = float(np.linalg.eigvalsh(F)[0])
    if lam <= cut:
        raise SingularFisher(lam)
    return F


def optimal_local_estimator(M, tangent: Tangent, theta0):
    """Estimator attaining ``V = F^{-1}`` for the POVM ``M``.

    Returns an ``(s, d)`` array of estimates, one row per outcome.  Outcomes
    with negligible probability are mapped to ``theta0``.
    """
    M = _as_povm(M)
    _check_tangent(M, tangent)
    theta0 = np.asarray(theta0, dtype=float).reshape(-1)
    F = require_invertible(classical_fisher(M, tangent))
    p, a = outcome_statistics(M.elements, tangent)
    keep = p > P_CUT
    scores = np.where(keep[:, None], a / np.where(keep, p, 1.0)[:, None], 0.0)
    return theta0 + np.linalg.solve(F, scores.T).T


class LueResiduals(NamedTuple):
    passed: bool
    bias: np.ndarray
    derivative: np.ndarray


def lue_check(M, estimates, tangent: Tangent, theta0, tol=1e-8):
    """Check the two locally unbiased conditions and report their residuals.

    ``bias[i] = sum_x est_i(x) p_x - theta0_i`` and
    ``derivative[i, j] = sum_x est_i(x) tr(d_j rho M_x) - delta_ij``.
    """
    M = _as_povm(M)
    estimates = np.asarray(estimates, dtype=float)
    theta0 = np.asarray(theta0, dtype=float).reshape(-1)
    if estimates.shape != (M.size, tangent.d):
        raise DimensionMismatch(f"estimator has shape {estimates.shape}, expected {(M.size, tangent.d)}")
    p, a = outcome_statistics(M.elements, tangent)
    bias = estimates.T @ p - theta0
    deriv = estimates.T @ a - np.eye(tangent.d)
    passed = bool(np.max(np.abs(bias)) <= tol and np.max(np.abs(deriv)) <= tol)
    return LueResiduals(passed, bias, deriv)


def mse_matrix(M, estimates, tangent: Tangent, theta0):
    M = _as_povm(M)
    estimates = np.asarray(estimates, dtype=float)
    dev = estimates - np.asarray(theta0, dtype=float).reshape(1, -1)
    p, _ = outcome_statistics(M.elements, tangent)
    V = (dev * p[:, None]).T @ dev
    return 0.5 * (V + V.T)


def weighted_cost(W, F):
    """``Tr(W F^{-1})`` computed with a linear solve."""
    F = np.asarray(F, dtype=float)
    W = check_weight(W, F.shape[0])
    require_invertible(F)
    return float(np.trace(np.linalg.solve(F, W)))
