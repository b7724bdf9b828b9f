"""Finite-support measurements for quantum estimation.

Fisher-information and Bayes-cost machinery, Caratheodory-type support
reduction of POVMs onto sufficient real subalgebras, and multi-restart
optimizers for measurements of bounded support.
"""

from .bayes import DiscretePrior, bayes_cost, disk_prior, h_cost, optimal_bayes_estimator
from .estimators import BayesMeasurementOptimizer, LocalMeasurementOptimizer, PovmReducer
from .exceptions import (
    DimensionMismatch,
    InsufficientNearOptimalRestarts,
    NoDependenceFound,
    NotComplete,
    NotHermitian,
    NotInSubalgebra,
    NotPsd,
    NumericalError,
    OutOfDomain,
    PovmSupportError,
    SingularFisher,
    UnsupportedRing,
    ValidationError,
)
from .local import (
    classical_fisher,
    g_contribution,
    lue_check,
    mse_matrix,
    optimal_local_estimator,
    weighted_cost,
)
from .models import (
    StateModel,
    Tangent,
    finite_difference_derivatives,
    point_model,
    qfi_matrix,
    qubit_xz,
    qubit_xz_2copy_subalgebra,
    qubit_xz_subalgebra,
    sld,
    tensor_power,
)
from .operators import Povm, random_povm, rank_one_split, spectral_decompose, validate_povm
from .optimize import OptimizationReport, OptimizerConfig, minimize_bayes, minimize_local, uniqueness_audit
from .reduction import ReducedPovm, ReductionCertificate, merge_outcomes, reduce_bayes, reduce_improving, reduce_preserving
from .subalgebra import BlockSpec, Ring, SubalgebraSpec, dim_h, extreme_decompose, hermitian_basis, project

__version__ = "0.1.0"
