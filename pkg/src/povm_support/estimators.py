"""scikit-learn style wrappers around the reduction and optimization routines.

The estimators follow the usual conventions: constructor arguments are
stored untouched, ``fit`` does the work and sets trailing-underscore
attributes, and ``get_params``/``set_params``/``clone`` work as usual.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import IndexOutOfRange, ValidationError
from .local import check_weight, optimal_local_estimator
from .models import BUILTIN_SUBALGEBRAS, StateModel, get_model
from .operators import Povm, validate_povm
from .optimize import OptimizerConfig, minimize_bayes, minimize_local
from .reduction import reduce_bayes, reduce_improving, reduce_preserving
from .subalgebra import SubalgebraSpec


def _resolve_model(model):
    if isinstance(model, str):
        return get_model(model)
    if not isinstance(model, StateModel):
        raise ValidationError(f"model must be a StateModel or builtin name, got {type(model).__name__}")
    return model


def _resolve_spec(spec, dim):
    if spec is None:
        return SubalgebraSpec.full(dim)
    if isinstance(spec, str):
        if spec not in BUILTIN_SUBALGEBRAS:
            raise ValidationError(f"unknown subalgebra {spec!r}")
        return BUILTIN_SUBALGEBRAS[spec]()
    if not isinstance(spec, SubalgebraSpec):
        raise ValidationError("subalgebra must be a SubalgebraSpec, builtin name or None")
    return spec


def _lookup(table, outcomes):
    idx = np.asarray(outcomes, dtype=int)
    if np.any(idx < 0) or np.any(idx >= table.shape[0]):
        raise IndexOutOfRange(f"outcomes must lie in [0, {table.shape[0]})")
    return table[idx]


class PovmReducer(TransformerMixin, BaseEstimator):
    """Reduce the number of outcomes of a POVM.

    Parameters
    ----------
    mode : {"preserve", "improve", "bayes"}
        ``preserve`` keeps the Fisher matrix fixed, ``improve`` yields extremal
        elements with a Fisher matrix at least as large, ``bayes`` does not
        raise the average cost under ``prior``.
    subalgebra : SubalgebraSpec or None
        Sufficient subalgebra; None means the full operator algebra.
    model, theta : used by the local modes.
    prior : DiscretePrior, used by ``bayes``.
    """

    def __init__(self, mode="improve", subalgebra=None, model=None, theta=None, prior=None):
        self.mode = mode
        self.subalgebra = subalgebra
        self.model = model
        self.theta = theta
        self.prior = prior

    def fit(self, X=None, y=None):
        if self.mode not in ("preserve", "improve", "bayes"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.mode == "bayes":
            if self.prior is None:
                raise ValidationError("mode='bayes' needs a prior")
            self.dim_ = self.prior.dim
        else:
            if self.model is None or self.theta is None:
                raise ValidationError(f"mode={self.mode!r} needs model and theta")
            self.tangent_ = _resolve_model(self.model).tangent(self.theta)
            self.dim_ = self.tangent_.dim
        self.subalgebra_ = _resolve_spec(self.subalgebra, self.dim_)
        return self

    def transform(self, X):
        """Return the reduced :class:`Povm`; details land in ``reduction_``."""
        check_is_fitted(self, "subalgebra_")
        M = X if isinstance(X, Povm) else validate_povm(X)
        if self.mode == "bayes":
            self.reduction_ = reduce_bayes(M, self.subalgebra_, self.prior)
        elif self.mode == "preserve":
            self.reduction_ = reduce_preserving(M, self.subalgebra_, self.tangent_)
        else:
            self.reduction_ = reduce_improving(M, self.subalgebra_, self.tangent_)
        self.certificates_ = self.reduction_.certificates
        return self.reduction_.povm


class _MeasurementOptimizer(BaseEstimator):
    def _config(self):
        return OptimizerConfig(self.support_size, self.restarts, self.max_iters, self.grad_tol, self.seed)

    def predict(self, outcomes):
        """Parameter estimates for observed outcome labels."""
        check_is_fitted(self, "estimates_")
        return _lookup(self.estimates_, outcomes)


class LocalMeasurementOptimizer(_MeasurementOptimizer):
    """Search for a POVM minimizing ``Tr(W F^{-1})`` at ``theta``.

    After ``fit``: ``povm_``, ``fisher_``, ``cost_``, ``report_`` and
    ``estimates_`` (the locally unbiased estimate for each outcome).
    """

    def __init__(self, model="qubit-xz", theta=(0.0, 0.0), weight=None, subalgebra=None,
                 support_size=5, restarts=32, max_iters=2000, grad_tol=1e-9, seed=0):
        self.model = model
        self.theta = theta
        self.weight = weight
        self.subalgebra = subalgebra
        self.support_size = support_size
        self.restarts = restarts
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.seed = seed

    def fit(self, X=None, y=None):
        model = _resolve_model(self.model)
        W = np.eye(model.param_dim) if self.weight is None else check_weight(self.weight, model.param_dim)
        spec = _resolve_spec(self.subalgebra, model.hilbert_dim)
        self.report_ = minimize_local(model, self.theta, W, spec, self._config())
        self.povm_ = self.report_.best_povm
        self.fisher_ = self.report_.best_fisher
        self.cost_ = self.report_.best_cost
        self.estimates_ = optimal_local_estimator(self.povm_, model.tangent(self.theta), self.theta)
        return self


class BayesMeasurementOptimizer(_MeasurementOptimizer):
    """Search for a POVM and estimator minimizing the average cost under ``prior``.

    After ``fit``: ``povm_``, ``cost_``, ``report_`` and ``estimates_``.
    """

    def __init__(self, prior=None, subalgebra=None, support_size=3, restarts=32,
                 max_iters=2000, grad_tol=1e-9, seed=0):
        self.prior = prior
        self.subalgebra = subalgebra
        self.support_size = support_size
        self.restarts = restarts
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.seed = seed

    def fit(self, X=None, y=None):
        if self.prior is None:
            raise ValidationError("a prior is required")
        spec = _resolve_spec(self.subalgebra, self.prior.dim)
        self.report_ = minimize_bayes(self.prior, spec, self._config())
        self.povm_ = self.report_.best_povm
        self.cost_ = self.report_.best_cost
        self.estimates_ = self.report_.best_estimates
        return self
