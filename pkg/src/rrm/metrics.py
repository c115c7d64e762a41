"""Error metrics used to score fitted parameters against the truth."""

from __future__ import annotations

import numpy as np


def _nonzero_vector(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float).ravel()
    if arr.size == 0 or not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be a finite non-empty vector")
    if float(np.linalg.norm(arr)) == 0.0:
        raise ValueError(f"{name} must be nonzero")
    return arr


def relative_error(theta_hat, theta_star) -> float:
    """Euclidean error |theta* - theta_hat| relative to |theta*|."""
    star = _nonzero_vector(theta_star, "theta_star")
    hat = np.asarray(theta_hat, dtype=float).ravel()
    if hat.shape != star.shape:
        raise ValueError("theta_hat and theta_star must have the same shape")
    return float(np.linalg.norm(star - hat) / np.linalg.norm(star))


def angle_degrees(theta_hat, theta_star) -> float:
    """Angle between two nonzero vectors, in degrees, in [0, 180]."""
    hat = _nonzero_vector(theta_hat, "theta_hat")
    star = _nonzero_vector(theta_star, "theta_star")
    if hat.shape != star.shape:
        raise ValueError("theta_hat and theta_star must have the same shape")
    cosine = float(np.dot(hat, star) / (np.linalg.norm(hat) * np.linalg.norm(star)))
    return float(np.degrees(np.arccos(np.clip(cosine, -1.0, 1.0))))


def misalignment(theta_hat, theta_star) -> float:
    """Subspace mismatch 1 - |theta_hat . theta_star| for unit vectors.

    Sign-invariant: a direction and its negation give the same value.
    """
    hat = _nonzero_vector(theta_hat, "theta_hat")
    star = _nonzero_vector(theta_star, "theta_star")
    if hat.shape != star.shape:
        raise ValueError("theta_hat and theta_star must have the same shape")
    for name, vec in (("theta_hat", hat), ("theta_star", star)):
        if abs(float(np.linalg.norm(vec)) - 1.0) > 1e-8:
            raise ValueError(f"{name} must be a unit vector")
    return float(np.clip(1.0 - abs(float(np.dot(hat, star))), 0.0, 1.0))


def covariance_relative_error(sigma_hat, sigma_star) -> float:
    """Frobenius error |Sigma* - Sigma_hat|_F relative to |Sigma*|_F."""
    star = np.asarray(sigma_star, dtype=float)
    hat = np.asarray(sigma_hat, dtype=float)
    if star.shape != hat.shape:
        raise ValueError("covariance shapes must match")
    denom = float(np.linalg.norm(star))
    if denom == 0.0:
        raise ValueError("sigma_star must be nonzero")
    return float(np.linalg.norm(star - hat) / denom)
