"""Loss functions and exact weighted fitters for the four model families.

Each family pairs a per-sample loss with a solver for the weighted
empirical risk: closed forms for linear regression and the Gaussian,
damped Newton (IRLS) for logistic regression, and power iteration on the
weighted second-moment matrix for the principal direction.
"""

from __future__ import annotations

import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import expit

from .exceptions import DegenerateDataError, NumericalError
from .weights import Weights

_IRLS_RIDGE = 1e-8
_IRLS_GRAD_TOL = 1e-6
_IRLS_MAX_ITER = 100
_POWER_MAX_ITER = 10_000
_POWER_RESIDUAL_TOL = 1e-10  # relative to the dominant eigenvalue
_EIG_TIE_TOL = 1e-10


def _as_matrix(X) -> np.ndarray:
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("expected a non-empty 2-d array of samples")
    if not np.all(np.isfinite(arr)):
        raise ValueError("samples must be finite")
    return arr


def _as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr


# ---------------------------------------------------------------------------
# Parameter types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinRegParams:
    """Linear predictor coefficients for y_hat = x @ coefficients."""

    coefficients: np.ndarray

    def __post_init__(self):
        coef = _as_vector(self.coefficients, "coefficients").copy()
        coef.flags.writeable = False
        object.__setattr__(self, "coefficients", coef)


@dataclass(frozen=True)
class LogRegParams:
    """Logistic coefficients on the intercept-augmented features [1, x]."""

    coefficients: np.ndarray

    def __post_init__(self):
        coef = _as_vector(self.coefficients, "coefficients").copy()
        if coef.size < 2:
            raise ValueError("logistic coefficients need an intercept plus at least one feature")
        coef.flags.writeable = False
        object.__setattr__(self, "coefficients", coef)


@dataclass(frozen=True)
class PcaParams:
    """Unit direction spanning the fitted one-dimensional subspace.

    Sign convention: the first component that is nonzero (beyond
    1e-12 of the largest entry) is positive, so a direction and its
    negation normalize to the same value.
    """

    direction: np.ndarray

    def __post_init__(self):
        vec = _as_vector(self.direction, "direction").copy()
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"direction must be a unit vector, got norm {norm!r}")
        lead = _leading_sign(vec)
        if lead < 0:
            raise ValueError("direction must have its first nonzero component positive")
        vec.flags.writeable = False
        object.__setattr__(self, "direction", vec)


def _leading_sign(vec: np.ndarray) -> float:
    tol = 1e-12 * float(np.abs(vec).max())
    for x in vec:
        if abs(x) > tol:
            return float(np.sign(x))
    return 1.0


def canonicalize_direction(vec: np.ndarray) -> np.ndarray:
    """Normalize to unit length and flip so the first nonzero component is positive."""
    v = _as_vector(vec, "direction")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        raise ValueError("cannot canonicalize the zero vector")
    v = v / norm
    return v * _leading_sign(v)


@dataclass(frozen=True)
class GaussianParams:
    """Mean vector and symmetric positive-definite covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = _as_vector(self.mean, "mean").copy()
        cov = np.asarray(self.covariance, dtype=float).copy()
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean of size {mean.size}")
        if not np.all(np.isfinite(cov)):
            raise ValueError("covariance must be finite")
        asym = float(np.abs(cov - cov.T).max())
        if asym > 1e-12 * max(1.0, float(np.abs(cov).max())):
            raise ValueError(f"covariance must be symmetric, asymmetry {asym!r}")
        cov = 0.5 * (cov + cov.T)
        if float(np.linalg.eigvalsh(cov).min()) <= 0.0:
            raise ValueError("covariance must be positive definite")
        mean.flags.writeable = False
        cov.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)


# ---------------------------------------------------------------------------
# Linear regression
# ---------------------------------------------------------------------------

def linreg_losses(params: LinRegParams, X, y) -> np.ndarray:
    """Squared prediction errors (y - x@theta)^2, one per sample."""
    X = _as_matrix(X)
    y = _as_vector(y, "y")
    if X.shape[1] != params.coefficients.size:
        raise ValueError(
            f"feature dimension {X.shape[1]} does not match coefficients of size "
            f"{params.coefficients.size}"
        )
    if X.shape[0] != y.size:
        raise ValueError("X and y must have the same number of samples")
    resid = y - X @ params.coefficients
    return resid ** 2


def linreg_weighted_fit(X, y, weights: Weights) -> LinRegParams:
    """Minimizer of the weighted squared error: solve the weighted normal equations."""
    X = _as_matrix(X)
    y = _as_vector(y, "y")
    w = weights.values
    if X.shape[0] != w.size or y.size != w.size:
        raise ValueError("X, y and weights must agree on the number of samples")
    gram = (X * w[:, None]).T @ X
    gram = 0.5 * (gram + gram.T)
    moment = X.T @ (w * y)
    evals = np.linalg.eigvalsh(gram)
    if evals[0] <= 1e-12 * max(evals[-1], np.finfo(float).tiny):
        support = int(np.count_nonzero(w > 0.0))
        raise DegenerateDataError(
            f"weighted Gram matrix is singular for dimension {X.shape[1]} "
            f"({support} samples carry positive weight)"
        )
    return LinRegParams(np.linalg.solve(gram, moment))


# ---------------------------------------------------------------------------
# Logistic regression
# ---------------------------------------------------------------------------

def _augment(X: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((X.shape[0], 1)), X])


def _check_labels(y: np.ndarray) -> np.ndarray:
    arr = _as_vector(y, "labels")
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise ValueError("labels must be 0 or 1")
    return arr


def logreg_losses(params: LogRegParams, X, y) -> np.ndarray:
    """Cross-entropy losses, computed in log-sum-exp form for stability."""
    X = _as_matrix(X)
    y = _check_labels(y)
    phi = _augment(X)
    if phi.shape[1] != params.coefficients.size:
        raise ValueError(
            f"augmented dimension {phi.shape[1]} does not match coefficients of size "
            f"{params.coefficients.size}"
        )
    margin = phi @ params.coefficients
    # -y ln(sigma) - (1-y) ln(1-sigma)  ==  softplus(margin) - y*margin
    return np.logaddexp(0.0, margin) - y * margin


def logreg_weighted_fit(X, y, weights: Weights, init: LogRegParams | None = None) -> LogRegParams:
    """Weighted logistic fit by damped Newton (IRLS).

    A tiny ridge (1e-8) keeps the Newton system well posed on separable
    data. Convergence is declared on the unridged weighted gradient,
    norm <= 1e-6; hitting the iteration cap raises with the residual
    gradient norm attached.
    """
    X = _as_matrix(X)
    y = _check_labels(y)
    w = weights.values
    if X.shape[0] != w.size or y.size != w.size:
        raise ValueError("X, y and weights must agree on the number of samples")
    active = w > 0.0
    if not (np.any(y[active] == 1.0) and np.any(y[active] == 0.0)):
        raise DegenerateDataError("weighted data contains a single class; logistic fit is unbounded")

    phi = _augment(X)
    theta = np.zeros(phi.shape[1]) if init is None else init.coefficients.copy()

    def objective(t: np.ndarray) -> float:
        margin = phi @ t
        return float(np.dot(w, np.logaddexp(0.0, margin) - y * margin)
                     + 0.5 * _IRLS_RIDGE * np.dot(t, t))

    obj = objective(theta)
    grad_norm = np.inf
    for _ in range(_IRLS_MAX_ITER):
        margin = phi @ theta
        prob = expit(margin)
        grad_data = phi.T @ (w * (prob - y))
        grad_norm = float(np.linalg.norm(grad_data))
        if grad_norm <= _IRLS_GRAD_TOL:
            return LogRegParams(theta)
        grad = grad_data + _IRLS_RIDGE * theta
        curv = w * prob * (1.0 - prob)
        hess = (phi * curv[:, None]).T @ phi + _IRLS_RIDGE * np.eye(phi.shape[1])
        step = np.linalg.solve(hess, grad)
        t_step = 1.0
        while t_step > 1e-18:
            candidate = theta - t_step * step
            cand_obj = objective(candidate)
            if cand_obj <= obj:
                theta, obj = candidate, cand_obj
                break
            t_step /= 2.0
        else:
            break  # no descent possible; report the residual gradient below
    raise NumericalError(
        f"IRLS did not converge in {_IRLS_MAX_ITER} iterations; "
        f"weighted gradient norm {grad_norm:g} (tol {_IRLS_GRAD_TOL:g})"
    )


# ---------------------------------------------------------------------------
# Principal direction (one-dimensional PCA)
# ---------------------------------------------------------------------------

def pca_losses(params: PcaParams, Z) -> np.ndarray:
    """Squared residual after projecting onto the direction: |z|^2 - (theta.z)^2."""
    Z = _as_matrix(Z)
    if Z.shape[1] != params.direction.size:
        raise ValueError(
            f"sample dimension {Z.shape[1]} does not match direction of size "
            f"{params.direction.size}"
        )
    proj = Z @ params.direction
    return np.einsum("ij,ij->i", Z, Z) - proj ** 2


def pca_weighted_fit(Z, weights: Weights) -> PcaParams:
    """Dominant eigenvector of the weighted second-moment matrix.

    Power iteration from the normalized all-ones vector, run on the
    eigenvalue-normalized matrix to a residual of 1e-10. Ties in the top
    eigenvalue (within 1e-10) trigger a warning and a deterministic
    fallback to the dense eigendecomposition, as does the rare failure
    of power iteration to separate a thin spectral gap.
    """
    Z = _as_matrix(Z)
    w = weights.values
    if Z.shape[0] != w.size:
        raise ValueError("Z and weights must agree on the number of samples")
    second_moment = Z.T @ (Z * w[:, None])
    second_moment = 0.5 * (second_moment + second_moment.T)
    if not np.any(second_moment):
        raise DegenerateDataError("weighted second-moment matrix is zero; no direction to fit")

    if Z.shape[1] == 1:
        return PcaParams(np.array([1.0]))

    evals = np.linalg.eigvalsh(second_moment)
    lam1, lam2 = float(evals[-1]), float(evals[-2])
    if lam1 - lam2 <= _EIG_TIE_TOL * max(1.0, abs(lam1)):
        warnings.warn(
            "top eigenvalues are tied within tolerance; the fitted direction is "
            "ambiguous and resolved by sign canonicalization",
            RuntimeWarning,
            stacklevel=2,
        )
        return PcaParams(canonicalize_direction(_dense_top_eigvec(second_moment)))

    scaled = second_moment / lam1
    vec = _power_iteration(scaled, lam1_scaled=1.0)
    if vec is None:
        vec = _dense_top_eigvec(second_moment)
    return PcaParams(canonicalize_direction(vec))


def _dense_top_eigvec(matrix: np.ndarray) -> np.ndarray:
    _, vecs = np.linalg.eigh(matrix)
    return vecs[:, -1]


def _power_iteration(matrix: np.ndarray, lam1_scaled: float) -> np.ndarray | None:
    d = matrix.shape[0]
    vec = np.full(d, 1.0 / np.sqrt(d))
    for it in range(_POWER_MAX_ITER):
        nxt = matrix @ vec
        norm = float(np.linalg.norm(nxt))
        if norm == 0.0:
            # Start vector sits in the nullspace; restart along a basis axis.
            vec = np.zeros(d)
            vec[it % d] = 1.0
            continue
        vec = nxt / norm
        rayleigh = float(vec @ matrix @ vec)
        residual = float(np.linalg.norm(matrix @ vec - rayleigh * vec))
        if residual <= _POWER_RESIDUAL_TOL:
            if rayleigh < lam1_scaled - 1e-8:
                # Converged to a minor eigenvector (start was orthogonal to
                # the dominant one); nudge deterministically and continue.
                vec = vec + 0.5 * np.eye(d)[int(np.argmax(np.diag(matrix)))]
                vec = vec / float(np.linalg.norm(vec))
                continue
            return vec
    return None


# ---------------------------------------------------------------------------
# Gaussian mean/covariance
# ---------------------------------------------------------------------------

def gaussian_losses(params: GaussianParams, Z) -> np.ndarray:
    """Negative log-likelihood up to constants: (z-mu)' inv(Sigma) (z-mu) + ln|Sigma|."""
    Z = _as_matrix(Z)
    if Z.shape[1] != params.mean.size:
        raise ValueError(
            f"sample dimension {Z.shape[1]} does not match mean of size {params.mean.size}"
        )
    factor = cho_factor(params.covariance, lower=True)
    diff = Z - params.mean
    solved = cho_solve(factor, diff.T).T
    quad = np.einsum("ij,ij->i", diff, solved)
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    return quad + logdet


def gaussian_weighted_fit(Z, weights: Weights) -> GaussianParams:
    """Weighted sample mean and (biased, weight-normalized) covariance."""
    Z = _as_matrix(Z)
    w = weights.values
    if Z.shape[0] != w.size:
        raise ValueError("Z and weights must agree on the number of samples")
    mean = w @ Z
    diff = Z - mean
    cov = diff.T @ (diff * w[:, None])
    cov = 0.5 * (cov + cov.T)
    evals = np.linalg.eigvalsh(cov)
    if evals[0] <= 1e-12 * max(evals[-1], np.finfo(float).tiny):
        support = int(np.count_nonzero(w > 0.0))
        raise DegenerateDataError(
            f"weighted covariance is singular in dimension {Z.shape[1]} "
            f"({support} samples carry positive weight)"
        )
    return GaussianParams(mean, cov)


# ---------------------------------------------------------------------------
# Family interface used by the solver
# ---------------------------------------------------------------------------

class ModelFamily(ABC):
    """A per-sample loss paired with an exact weighted-risk minimizer."""

    name: str

    @abstractmethod
    def n_samples(self, data) -> int:
        """Number of samples in this family's data representation."""

    @abstractmethod
    def param_dimension(self, data) -> int:
        """Number of free parameters fitted from this data."""

    @abstractmethod
    def per_sample_losses(self, params, data) -> np.ndarray:
        """Vector of losses, one per sample."""

    @abstractmethod
    def weighted_fit(self, data, weights: Weights, init=None):
        """Parameters minimizing the weighted empirical risk."""


class LinearRegressionFamily(ModelFamily):
    """Squared-error regression on (X, y) data."""

    name = "linreg"

    def n_samples(self, data):
        return _as_matrix(data[0]).shape[0]

    def param_dimension(self, data):
        return _as_matrix(data[0]).shape[1]

    def per_sample_losses(self, params, data):
        return linreg_losses(params, data[0], data[1])

    def weighted_fit(self, data, weights, init=None):
        return linreg_weighted_fit(data[0], data[1], weights)


class LogisticRegressionFamily(ModelFamily):
    """Cross-entropy classification on (X, y) data with labels in {0, 1}."""

    name = "logreg"

    def n_samples(self, data):
        return _as_matrix(data[0]).shape[0]

    def param_dimension(self, data):
        return _as_matrix(data[0]).shape[1] + 1

    def per_sample_losses(self, params, data):
        return logreg_losses(params, data[0], data[1])

    def weighted_fit(self, data, weights, init=None):
        return logreg_weighted_fit(data[0], data[1], weights, init=init)


class PcaFamily(ModelFamily):
    """One-dimensional subspace fitting on a sample matrix Z."""

    name = "pca"

    def n_samples(self, data):
        return _as_matrix(data).shape[0]

    def param_dimension(self, data):
        return _as_matrix(data).shape[1]

    def per_sample_losses(self, params, data):
        return pca_losses(params, data)

    def weighted_fit(self, data, weights, init=None):
        return pca_weighted_fit(data, weights)


class GaussianFamily(ModelFamily):
    """Mean/covariance estimation on a sample matrix Z."""

    name = "gaussian"

    def n_samples(self, data):
        return _as_matrix(data).shape[0]

    def param_dimension(self, data):
        d = _as_matrix(data).shape[1]
        return d + d * (d + 1) // 2

    def per_sample_losses(self, params, data):
        return gaussian_losses(params, data)

    def weighted_fit(self, data, weights, init=None):
        return gaussian_weighted_fit(data, weights)


LINEAR_REGRESSION = LinearRegressionFamily()
LOGISTIC_REGRESSION = LogisticRegressionFamily()
PCA = PcaFamily()
GAUSSIAN = GaussianFamily()

MODEL_FAMILIES = {
    family.name: family
    for family in (LINEAR_REGRESSION, LOGISTIC_REGRESSION, PCA, GAUSSIAN)
}
