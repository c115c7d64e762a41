"""Robust risk minimization under an unknown corrupted-data fraction.

Fits model parameters jointly with entropy-constrained sample weights:
samples with large losses are downweighted, subject to the weights
keeping an effective sample size of at least (1 - eps_tilde) * n, where
eps_tilde is the user's upper bound on the corrupted fraction.
"""

from .datagen import (
    CovarianceSpec,
    LinRegSpec,
    LogRegSpec,
    PcaSpec,
    flip_labels,
    gen_covariance,
    gen_linreg,
    gen_logreg,
    gen_pca,
    sample_student_t,
)
from .exceptions import DataFormatError, DegenerateDataError, NumericalError
from .experiments import (
    ConfusionMatrix,
    ExperimentSummary,
    MethodStats,
    TrialResult,
    run_experiment,
    run_linreg_sweep,
    run_real_data,
)
from .metrics import angle_degrees, covariance_relative_error, misalignment, relative_error
from .models import (
    GAUSSIAN,
    LINEAR_REGRESSION,
    LOGISTIC_REGRESSION,
    MODEL_FAMILIES,
    PCA,
    GaussianParams,
    LinRegParams,
    LogRegParams,
    ModelFamily,
    PcaParams,
    gaussian_losses,
    gaussian_weighted_fit,
    linreg_losses,
    linreg_weighted_fit,
    logreg_losses,
    logreg_weighted_fit,
    pca_losses,
    pca_weighted_fit,
)
from .solver import RrmConfig, RrmResult, erm_fit, rrm_fit
from .weights import (
    InnerSolution,
    RobustnessBound,
    Weights,
    concentrated_objective,
    entropy,
    solve_inner,
    weights_at_lambda,
)

__version__ = "0.1.0"

__all__ = [
    "ConfusionMatrix",
    "CovarianceSpec",
    "DataFormatError",
    "DegenerateDataError",
    "ExperimentSummary",
    "GAUSSIAN",
    "GaussianParams",
    "InnerSolution",
    "LINEAR_REGRESSION",
    "LOGISTIC_REGRESSION",
    "LinRegParams",
    "LinRegSpec",
    "LogRegParams",
    "LogRegSpec",
    "MODEL_FAMILIES",
    "MethodStats",
    "ModelFamily",
    "NumericalError",
    "PCA",
    "PcaParams",
    "PcaSpec",
    "RobustnessBound",
    "RrmConfig",
    "RrmResult",
    "TrialResult",
    "Weights",
    "angle_degrees",
    "concentrated_objective",
    "covariance_relative_error",
    "entropy",
    "erm_fit",
    "flip_labels",
    "gaussian_losses",
    "gaussian_weighted_fit",
    "gen_covariance",
    "gen_linreg",
    "gen_logreg",
    "gen_pca",
    "linreg_losses",
    "linreg_weighted_fit",
    "logreg_losses",
    "logreg_weighted_fit",
    "misalignment",
    "pca_losses",
    "pca_weighted_fit",
    "relative_error",
    "rrm_fit",
    "run_experiment",
    "run_linreg_sweep",
    "run_real_data",
    "sample_student_t",
    "solve_inner",
    "weights_at_lambda",
]
