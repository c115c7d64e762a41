"""Seeded generators for the contamination mixtures used in the experiments.

Every generator draws each sample from the clean component with
probability 1-eps and from the corrupting component otherwise, and
returns the ground-truth corruption mask alongside the data. The mask is
for evaluation only; the solvers never see it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def as_rng(rng) -> np.random.Generator:
    """Pass through a Generator, or seed a fresh PCG64 stream with an int."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_student_t(rng, location, scale, nu: float, count: int) -> np.ndarray:
    """Multivariate Student-t draws: location + (L g) * sqrt(nu / chi2_nu).

    L is the Cholesky factor of the scale matrix, g a standard normal
    vector; the normal block is drawn before the chi-square block, which
    fixes the stream layout for reproducibility.
    """
    rng = as_rng(rng)
    loc = np.atleast_1d(np.asarray(location, dtype=float))
    scale_mat = np.atleast_2d(np.asarray(scale, dtype=float))
    if not (np.isfinite(nu) and nu > 0.0):
        raise ValueError(f"nu must be positive, got {nu!r}")
    if count < 0:
        raise ValueError("count must be nonnegative")
    d = loc.size
    if scale_mat.shape != (d, d):
        raise ValueError(f"scale shape {scale_mat.shape} does not match location of size {d}")
    try:
        chol = np.linalg.cholesky(scale_mat)
    except np.linalg.LinAlgError as err:
        raise ValueError("scale matrix must be positive definite") from err
    gauss = rng.standard_normal((count, d))
    chi2 = rng.chisquare(nu, count)
    return loc + (gauss @ chol.T) * np.sqrt(nu / chi2)[:, None]


def _check_eps(eps: float) -> None:
    # eps = 1 (fully corrupted data) is allowed for generators; only the
    # solver's corruption bound is restricted to [0, 1).
    if not (0.0 <= eps <= 1.0):
        raise ValueError(f"eps must lie in [0, 1], got {eps!r}")


def _corruption_mask(rng: np.random.Generator, eps: float, n: int) -> np.ndarray:
    return rng.random(n) < eps


# ---------------------------------------------------------------------------
# Linear regression: uniform features, Gaussian clean noise, t-noise corruption
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinRegSpec:
    """Hyperplane data on a feature box, with heavy-tailed corrupted outcomes."""

    eps: float
    theta_star: np.ndarray = field(default_factory=lambda: np.ones(10))
    sigma: float = 0.25
    nu: float = 1.5
    feature_low: float = -5.0
    feature_high: float = 5.0

    def __post_init__(self):
        _check_eps(self.eps)
        theta = np.asarray(self.theta_star, dtype=float).copy()
        theta.flags.writeable = False
        object.__setattr__(self, "theta_star", theta)
        if not (self.sigma > 0.0):
            raise ValueError("sigma must be positive")
        if not (self.nu > 0.0):
            raise ValueError("nu must be positive")
        if not (self.feature_low < self.feature_high):
            raise ValueError("feature box must be non-empty")


def gen_linreg(rng, spec: LinRegSpec, n: int):
    """Draw (X, y, corrupted): y = x@theta* + noise, t-distributed where corrupted."""
    rng = as_rng(rng)
    d = spec.theta_star.size
    X = rng.uniform(spec.feature_low, spec.feature_high, (n, d))
    mask = _corruption_mask(rng, spec.eps, n)
    signal = X @ spec.theta_star
    y = signal + spec.sigma * rng.standard_normal(n)
    n_bad = int(mask.sum())
    if n_bad:
        heavy = sample_student_t(rng, [0.0], [[1.0]], spec.nu, n_bad).ravel()
        y[mask] = signal[mask] + heavy
    return X, y, mask


# ---------------------------------------------------------------------------
# Logistic regression: separable clean classes, a label-0 blob as corruption
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LogRegSpec:
    """Linearly separable classes plus a concentrated always-label-0 blob.

    Clean labels are y = 1{[1, x] @ theta_star > 0}: the classes are
    exactly separated by the hyperplane, matching the target model.
    """

    eps: float
    theta_star: np.ndarray = field(default_factory=lambda: np.array([-1.0, 1.0, 1.0]))
    clean_mean: np.ndarray = field(default_factory=lambda: np.array([0.5, 0.5]))
    clean_scale: float = 0.25
    rho: float = 0.99
    corrupt_mean: np.ndarray = field(default_factory=lambda: np.array([0.5, 1.25]))
    corrupt_var: float = 0.01
    forced_label: int = 0

    def __post_init__(self):
        _check_eps(self.eps)
        for name in ("theta_star", "clean_mean", "corrupt_mean"):
            arr = np.asarray(getattr(self, name), dtype=float).copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.theta_star.size != self.clean_mean.size + 1:
            raise ValueError("theta_star must have one more entry than the feature dimension")
        if not (-1.0 < self.rho < 1.0):
            raise ValueError("rho must lie in (-1, 1)")
        if not (self.clean_scale > 0.0 and self.corrupt_var > 0.0):
            raise ValueError("covariance scales must be positive")
        if self.forced_label not in (0, 1):
            raise ValueError("forced_label must be 0 or 1")

    @property
    def clean_cov(self) -> np.ndarray:
        return self.clean_scale * np.array([[1.0, -self.rho], [-self.rho, 1.0]])

    @property
    def corrupt_cov(self) -> np.ndarray:
        return self.corrupt_var * np.eye(self.corrupt_mean.size)


def gen_logreg(rng, spec: LogRegSpec, n: int):
    """Draw (X, y, corrupted): corrupted samples always carry the forced label."""
    rng = as_rng(rng)
    X = rng.multivariate_normal(spec.clean_mean, spec.clean_cov, n)
    mask = _corruption_mask(rng, spec.eps, n)
    margins = spec.theta_star[0] + X @ spec.theta_star[1:]
    y = (margins > 0.0).astype(float)
    n_bad = int(mask.sum())
    if n_bad:
        X[mask] = rng.multivariate_normal(spec.corrupt_mean, spec.corrupt_cov, n_bad)
        y[mask] = float(spec.forced_label)
    return X, y, mask


# ---------------------------------------------------------------------------
# PCA: data on a line through the origin, isotropic t-cloud as corruption
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PcaSpec:
    """Two-dimensional data concentrated around the subspace of theta_star."""

    eps: float
    theta_star: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 2.0]) / np.sqrt(5.0)
    )
    sigma: float = 0.25
    nu: float = 1.5

    def __post_init__(self):
        _check_eps(self.eps)
        theta = np.asarray(self.theta_star, dtype=float).copy()
        if theta.shape != (2,):
            raise ValueError("theta_star must be a 2-vector")
        if abs(float(np.linalg.norm(theta)) - 1.0) > 1e-10:
            raise ValueError("theta_star must be a unit vector")
        if theta[0] == 0.0:
            raise ValueError("theta_star must have a nonzero first component")
        theta.flags.writeable = False
        object.__setattr__(self, "theta_star", theta)
        if not (self.sigma > 0.0 and self.nu > 0.0):
            raise ValueError("sigma and nu must be positive")

    @property
    def slope(self) -> float:
        return float(self.theta_star[1] / self.theta_star[0])


def gen_pca(rng, spec: PcaSpec, n: int):
    """Draw (Z, corrupted): z2 = slope*z1 + noise when clean, isotropic t otherwise."""
    rng = as_rng(rng)
    z1 = rng.standard_normal(n)
    z2 = spec.slope * z1 + spec.sigma * rng.standard_normal(n)
    Z = np.column_stack([z1, z2])
    mask = _corruption_mask(rng, spec.eps, n)
    n_bad = int(mask.sum())
    if n_bad:
        Z[mask] = sample_student_t(rng, np.zeros(2), np.eye(2), spec.nu, n_bad)
    return Z, mask


# ---------------------------------------------------------------------------
# Covariance estimation: Gaussian cloud, same-scale t-cloud as corruption
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CovarianceSpec:
    """Gaussian data whose corrupting component shares mean and scale matrix."""

    eps: float
    mean: np.ndarray = field(default_factory=lambda: np.zeros(2))
    sigma_star: np.ndarray = field(
        default_factory=lambda: np.array([[1.0, 0.8], [0.8, 1.0]])
    )
    nu: float = 1.5

    def __post_init__(self):
        _check_eps(self.eps)
        mean = np.asarray(self.mean, dtype=float).copy()
        sigma = np.asarray(self.sigma_star, dtype=float).copy()
        if sigma.shape != (mean.size, mean.size):
            raise ValueError("sigma_star shape must match the mean dimension")
        if float(np.linalg.eigvalsh(0.5 * (sigma + sigma.T)).min()) <= 0.0:
            raise ValueError("sigma_star must be positive definite")
        mean.flags.writeable = False
        sigma.flags.writeable = False
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sigma_star", sigma)
        if not (self.nu > 0.0):
            raise ValueError("nu must be positive")


def gen_covariance(rng, spec: CovarianceSpec, n: int):
    """Draw (Z, corrupted) from the Gaussian/heavy-tail mixture."""
    rng = as_rng(rng)
    Z = rng.multivariate_normal(spec.mean, spec.sigma_star, n)
    mask = _corruption_mask(rng, spec.eps, n)
    n_bad = int(mask.sum())
    if n_bad:
        Z[mask] = sample_student_t(rng, spec.mean, spec.sigma_star, spec.nu, n_bad)
    return Z, mask


# ---------------------------------------------------------------------------
# Label flipping (real-data corruption)
# ---------------------------------------------------------------------------

def flip_labels(rng, labels, count: int, from_label=1, to_label=0):
    """Flip a uniformly random subset of `count` labels; returns (labels, flip mask)."""
    rng = as_rng(rng)
    y = np.asarray(labels).copy()
    if count < 0:
        raise ValueError("count must be nonnegative")
    candidates = np.flatnonzero(y == from_label)
    if count > candidates.size:
        raise ValueError(
            f"cannot flip {count} labels: only {candidates.size} samples have label {from_label!r}"
        )
    flip_mask = np.zeros(y.size, dtype=bool)
    if count:
        chosen = rng.choice(candidates, size=count, replace=False)
        y[chosen] = to_label
        flip_mask[chosen] = True
    return y, flip_mask
