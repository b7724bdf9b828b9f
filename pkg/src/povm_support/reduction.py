"""Caratheodory-type support reduction of POVMs.

All three reductions share one elimination step: find coefficients
``alpha`` with ``sum_x alpha_x M_x = 0`` (plus side conditions on the
Fisher contributions or the Bayes cost), rescale ``M_x -> (1 - t alpha_x) M_x``
with ``t = 1 / max alpha`` and drop the outcome that reaches zero.
Completeness is preserved because the ``alpha``-combination vanishes.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .bayes import DiscretePrior, _bayes_estimates, bayes_cost, prior_probabilities, quadratic_losses
from .exceptions import DimensionMismatch, IndexOutOfRange, NoDependenceFound
from .local import classical_fisher, g_stack
from .models import Tangent
from .operators import Povm, hermitize, validate_povm
from .subalgebra import SubalgebraSpec, dim_h, extreme_decompose, hermitian_coordinates, project, sufficiency_residual

logger = logging.getLogger(__name__)

DEPENDENCE_RTOL = 1e-9
ALPHA_FLOOR = 1e-12
TRACE_FLOOR = 1e-12
SUFFICIENCY_TOL = 1e-8


@dataclass
class ReductionCertificate:
    """Witness of one elimination round.

    ``residual`` is the observed deviation of the round's invariant: Fisher
    change (preserve), Fisher change other than ``t*r`` on the (1,1) entry
    (improve), or cost change other than ``-t*r`` (bayes). Local rounds also
    keep the full ``fisher_change``.
    """

    alphas: np.ndarray
    t: float
    removed_index: int
    r: float = 0.0
    rounds: int = 0
    dropped: List[int] = field(default_factory=list)
    residual: float = 0.0
    fisher_change: Optional[np.ndarray] = None

    def to_dict(self):
        out = {
            "alphas": [float(a) for a in self.alphas],
            "t": self.t,
            "removed_index": self.removed_index,
            "r": self.r,
            "rounds": self.rounds,
            "dropped": list(self.dropped),
            "residual": self.residual,
        }
        if self.fisher_change is not None:
            out["fisher_change"] = self.fisher_change.tolist()
        return out


@dataclass
class ReducedPovm:
    povm: Povm
    certificates: List[ReductionCertificate]
    fisher_before: Optional[np.ndarray] = None
    fisher_after: Optional[np.ndarray] = None
    cost_before: Optional[float] = None
    cost_after: Optional[float] = None

    @property
    def rounds(self):
        return len(self.certificates)


def merge_outcomes(M, i, j) -> Povm:
    """Sum outcomes ``i`` and ``j``; the merged element takes the smaller index."""
    M = M if isinstance(M, Povm) else validate_povm(M)
    s = M.size
    for k in (i, j):
        if not (0 <= k < s):
            raise IndexOutOfRange(f"outcome index {k} out of range for {s} outcomes")
    if i == j:
        raise IndexOutOfRange("cannot merge an outcome with itself")
    lo, hi = min(i, j), max(i, j)
    elements = list(M.elements)
    elements[lo] = elements[lo] + elements[hi]
    del elements[hi]
    return validate_povm(elements)


def find_dependence(coords):
    """Unit vector ``alpha`` with ``coords @ alpha ~ 0`` (columns are outcomes)."""
    rows, s = coords.shape
    _, sv, Vh = np.linalg.svd(coords, full_matrices=True)
    sv = np.concatenate([sv, np.zeros(max(0, s - sv.size))])
    smax = sv[0] if sv.size else 0.0
    if sv[s - 1] > DEPENDENCE_RTOL * max(smax, 1.0):
        raise NoDependenceFound(
            f"no linear dependence among {s} outcomes (sigma_min={sv[s - 1]:.3e}, sigma_max={smax:.3e})"
        )
    alpha = Vh[s - 1].real
    if np.max(np.abs(alpha)) < ALPHA_FLOOR:
        raise NoDependenceFound("dependence coefficients vanish")
    return alpha


def _eliminate(elements, alpha):
    x_star = int(np.argmax(alpha))
    t = 1.0 / alpha[x_star]
    coeff = np.clip(1.0 - t * alpha, 0.0, None)
    coeff[x_star] = 0.0
    scaled = [c * E for c, E in zip(coeff, elements)]
    traces = np.array([np.trace(E).real for E in scaled])
    dropped = [k for k in range(len(scaled)) if k != x_star and traces[k] < TRACE_FLOOR]
    keep = [k for k in range(len(scaled)) if k != x_star and k not in dropped]
    return [scaled[k] for k in keep], t, x_star, dropped


def _upper(G, skip_first=False):
    d = G.shape[-1]
    iu = np.triu_indices(d)
    flat = G[:, iu[0], iu[1]]
    return flat[:, 1:] if skip_first else flat


def _warn_if_insufficient(spec, operators, what):
    res = sufficiency_residual(spec, operators, samples=16, rng=0)
    if res > SUFFICIENCY_TOL:
        warnings.warn(
            f"subalgebra does not look sufficient for the {what} (residual {res:.3e}); "
            "the reduction may change the objective",
            RuntimeWarning,
            stacklevel=3,
        )
    return res


def _project_all(spec, M):
    projected = [hermitize(project(spec, E)) for E in M.elements]
    return [E for E in projected if np.trace(E).real >= TRACE_FLOOR]


def _check_inputs(M, spec, dim):
    M = M if isinstance(M, Povm) else validate_povm(M)
    spec.require_supported()
    if M.dim != spec.ambient_dim or M.dim != dim:
        raise DimensionMismatch(
            f"POVM dimension {M.dim}, subalgebra dimension {spec.ambient_dim}, state dimension {dim}"
        )
    return M


def reduce_preserving(M, spec: SubalgebraSpec, tangent: Tangent) -> ReducedPovm:
    """Shrink ``M`` to at most ``dim_h + d(d+1)/2`` outcomes in ``A_+`` with the same Fisher matrix."""
    M = _check_inputs(M, spec, tangent.dim)
    _warn_if_insufficient(spec, [tangent.rho, *tangent.drho], "local tangent")
    fisher_before = classical_fisher(M, tangent)
    elements = _project_all(spec, M)
    bound = dim_h(spec) + tangent.d * (tangent.d + 1) // 2
    certificates = []
    while len(elements) > bound:
        G = g_stack(elements, tangent)
        coords = np.hstack([hermitian_coordinates(spec, elements), _upper(G)]).T
        alpha = find_dependence(coords)
        if np.max(alpha) <= 0:
            alpha = -alpha
        F_old = G.sum(axis=0)
        elements, t, x_star, dropped = _eliminate(elements, alpha)
        F_new = g_stack(elements, tangent).sum(axis=0)
        certificates.append(
            ReductionCertificate(alpha, t, x_star, 0.0, len(certificates) + 1, dropped,
                                 float(np.max(np.abs(F_new - F_old))), F_new - F_old)
        )
        logger.debug("preserve round %d: removed %d, %d outcomes left", len(certificates), x_star, len(elements))
    povm = validate_povm(elements)
    return ReducedPovm(povm, certificates, fisher_before, classical_fisher(povm, tangent))


def extreme_refine(spec, elements):
    """Replace each element by its extremal pieces (rank-one within the blocks)."""
    out = []
    for E in elements:
        out.extend(piece.operator for piece in extreme_decompose(spec, E))
    return out


def reduce_improving(M, spec: SubalgebraSpec, tangent: Tangent) -> ReducedPovm:
    """Shrink ``M`` to at most ``dim_h + d(d+1)/2 - 1`` extremal outcomes without losing Fisher information.

    Each round raises only the (1,1) Fisher entry, by ``t*r >= 0``.
    """
    M = _check_inputs(M, spec, tangent.dim)
    pre = reduce_preserving(M, spec, tangent)
    elements = extreme_refine(spec, pre.povm.elements)
    bound = dim_h(spec) + tangent.d * (tangent.d + 1) // 2 - 1
    certificates = list(pre.certificates)
    while len(elements) > bound:
        G = g_stack(elements, tangent)
        coords = np.hstack([hermitian_coordinates(spec, elements), _upper(G, skip_first=True)]).T
        alpha = find_dependence(coords)
        r = -float(alpha @ G[:, 0, 0])
        if r < 0:
            alpha, r = -alpha, -r
        F_old = G.sum(axis=0)
        elements, t, x_star, dropped = _eliminate(elements, alpha)
        F_new = g_stack(elements, tangent).sum(axis=0)
        expected = F_old.copy()
        expected[0, 0] += t * r
        certificates.append(
            ReductionCertificate(alpha, t, x_star, r, len(certificates) + 1, dropped,
                                 float(np.max(np.abs(F_new - expected))), F_new - F_old)
        )
        logger.debug("improve round %d: removed %d, t*r=%.3e", len(certificates), x_star, t * r)
    povm = validate_povm(elements)
    return ReducedPovm(povm, certificates, pre.fisher_before, classical_fisher(povm, tangent))


def reduce_bayes(M, spec: SubalgebraSpec, prior: DiscretePrior) -> ReducedPovm:
    """Shrink ``M`` to at most ``dim_h`` extremal outcomes without raising the Bayes cost.

    The optimal estimator is recomputed after every round; with it held fixed
    a round lowers the cost by exactly ``t*r``.
    """
    M = _check_inputs(M, spec, prior.dim)
    _warn_if_insufficient(spec, list(prior.rhos), "prior states")
    cost_before = bayes_cost(M, prior)
    elements = extreme_refine(spec, _project_all(spec, M))
    bound = dim_h(spec)
    certificates = []
    while len(elements) > bound:
        probs = prior_probabilities(elements, prior)
        est = _bayes_estimates(probs, prior)
        losses = np.stack([quadratic_losses(v, prior) for v in est])
        h = (probs * losses) @ prior.weights
        alpha = find_dependence(hermitian_coordinates(spec, elements).T)
        r = float(alpha @ h)
        if r < 0:
            alpha, r = -alpha, -r
        old_cost = float(h.sum())
        keep_est = est
        elements, t, x_star, dropped = _eliminate(elements, alpha)
        kept = [k for k in range(len(keep_est)) if k != x_star and k not in dropped]
        new_probs = prior_probabilities(elements, prior) if elements else np.zeros((0, prior.size))
        new_losses = np.stack([quadratic_losses(keep_est[k], prior) for k in kept])
        new_cost = float(np.sum((new_probs * new_losses) @ prior.weights))
        certificates.append(
            ReductionCertificate(alpha, t, x_star, r, len(certificates) + 1, dropped,
                                 abs(new_cost - (old_cost - t * r)))
        )
        logger.debug("bayes round %d: removed %d, t*r=%.3e", len(certificates), x_star, t * r)
    povm = validate_povm(elements)
    return ReducedPovm(povm, certificates, cost_before=cost_before, cost_after=bayes_cost(povm, prior))
