"""Entropy-constrained sample weights.

Solves, exactly, the inner problem of robust risk minimization for a fixed
loss vector: minimize the weighted average loss over the probability
simplex subject to the weight entropy staying at or above a floor that
enforces a minimum effective sample size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .exceptions import NumericalError

# Sum-to-one tolerance for probability vectors.
_SUM_TOL = 1e-12
# Two losses count as tied at the minimum when they differ by less than
# this fraction of the loss spread (shift- and scale-invariant).
_TIE_REL_TOL = 1e-12
# Bisection stops when the entropy residual falls below this.
_ENTROPY_TOL = 1e-10
_MAX_BISECT = 500


def _as_loss_array(losses) -> np.ndarray:
    arr = np.asarray(losses, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("losses must be a non-empty 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("losses must be finite")
    return arr


@dataclass(frozen=True)
class Weights:
    """Probability weights over n training samples.

    Entries are nonnegative and sum to one (within 1e-12). The backing
    array is made read-only, so instances are safe to share.
    """

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("weights must be a non-empty 1-d array")
        if not np.all(np.isfinite(vals)):
            raise ValueError("weights must be finite")
        if np.any(vals < 0.0):
            raise ValueError("weights must be nonnegative")
        if abs(float(vals.sum()) - 1.0) > _SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {vals.sum()!r}")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, n: int) -> "Weights":
        if n < 1:
            raise ValueError("n must be positive")
        return cls(np.full(n, 1.0 / n))

    def __len__(self) -> int:
        return self.values.size

    def entropy(self) -> float:
        return entropy(self.values)


def entropy(weights) -> float:
    """Shannon entropy -sum(w*ln w) in nats, with the convention 0*ln 0 = 0."""
    vals = weights.values if isinstance(weights, Weights) else np.asarray(weights, dtype=float)
    pos = vals[vals > 0.0]
    return float(-np.dot(pos, np.log(pos)))


@dataclass(frozen=True)
class RobustnessBound:
    """Upper bound on the fraction of corrupted training samples."""

    eps_tilde: float

    def __post_init__(self):
        if not (0.0 <= self.eps_tilde < 1.0):
            raise ValueError(f"eps_tilde must lie in [0, 1), got {self.eps_tilde!r}")

    def check_sample_size(self, n: int) -> None:
        """Raise unless the implied effective sample size (1-eps_tilde)*n is at least 1."""
        if (1.0 - self.eps_tilde) * n < 1.0:
            raise ValueError(
                f"effective sample size (1-{self.eps_tilde})*{n} is below 1; "
                "lower eps_tilde or provide more samples"
            )

    def target_entropy(self, n: int) -> float:
        """Entropy floor ln[(1-eps_tilde)*n] for a sample of size n."""
        self.check_sample_size(n)
        return math.log((1.0 - self.eps_tilde) * n)


@dataclass(frozen=True)
class InnerSolution:
    """Optimal weights for one loss vector.

    lambda_star is the multiplier of the entropy constraint (0 when the
    constraint is slack at the minimum-loss vertex limit, or when no
    reweighting happens at all). log_normalizer is ln(c*) in
    pi_i = c* exp(-loss_i / lambda_star); for the lambda_star = 0 limits
    it is -ln(support size), the uniform normalizer on the support.
    """

    weights: Weights
    lambda_star: float
    log_normalizer: float
    achieved_entropy: float

    def __post_init__(self):
        if not (np.isfinite(self.lambda_star) and self.lambda_star >= 0.0):
            raise ValueError("lambda_star must be finite and nonnegative")


def weights_at_lambda(losses, lam: float) -> Weights:
    """Softmax weights pi_i proportional to exp(-loss_i / lam).

    The minimum loss is subtracted before exponentiating, so large loss
    spreads at small lam underflow gracefully instead of overflowing.
    """
    arr = _as_loss_array(losses)
    if not (np.isfinite(lam) and lam > 0.0):
        raise ValueError(f"lam must be positive, got {lam!r}")
    logw = _gibbs_log_weights(arr - arr.min(), lam)
    return Weights(np.exp(logw))


def _gibbs_log_weights(shifted_losses: np.ndarray, lam: float) -> np.ndarray:
    a = -shifted_losses / lam
    return a - logsumexp(a)


def _gibbs_entropy(log_weights: np.ndarray) -> float:
    w = np.exp(log_weights)
    mask = w > 0.0
    return float(-np.dot(w[mask], log_weights[mask]))


def solve_inner(losses, bound: RobustnessBound) -> InnerSolution:
    """Exact minimizer of sum(pi*loss) under the entropy floor of `bound`.

    If eps_tilde is 0 the only feasible point is uniform. Otherwise,
    when enough losses are tied at the minimum to satisfy the floor,
    the optimum is uniform over the tied set with a zero multiplier.
    In the remaining (generic) case the constraint is active and the
    multiplier lambda* solves H(softmax(-loss/lambda)) = floor, found by
    bisection: the softmax entropy is nondecreasing in lambda, ranging
    from ln(#ties) as lambda -> 0+ up to ln(n) as lambda -> infinity.
    """
    arr = _as_loss_array(losses)
    n = arr.size
    if n < 2:
        raise ValueError("solve_inner needs at least two samples")
    target = bound.target_entropy(n)

    if bound.eps_tilde == 0.0:
        log_n = math.log(n)
        return InnerSolution(Weights.uniform(n), 0.0, -log_n, log_n)

    lmin = float(arr.min())
    spread = float(arr.max()) - lmin
    tied = arr <= lmin + _TIE_REL_TOL * spread
    k = int(np.count_nonzero(tied))
    if math.log(k) >= target - 1e-12:
        vals = np.where(tied, 1.0 / k, 0.0)
        return InnerSolution(Weights(vals), 0.0, -math.log(k), math.log(k))

    shifted = arr - lmin
    lam = _bisect_lambda(shifted, target, spread)
    logw = _gibbs_log_weights(shifted, lam)
    # pi_i = c*·exp(-loss_i/lam)  =>  ln c* = ln pi_i + loss_i/lam at any i.
    imin = int(np.argmin(arr))
    log_normalizer = float(logw[imin]) + lmin / lam
    return InnerSolution(Weights(np.exp(logw)), lam, log_normalizer, _gibbs_entropy(logw))


def _bisect_lambda(shifted_losses: np.ndarray, target: float, spread: float) -> float:
    """Root of H(softmax(-losses/lam)) = target by monotone bisection."""

    def entropy_at(lam: float) -> float:
        return _gibbs_entropy(_gibbs_log_weights(shifted_losses, lam))

    scale = max(spread, 1.0)
    lo, hi = 1e-12 * scale, 1e4 * scale
    h_lo, h_hi = entropy_at(lo), entropy_at(hi)
    while h_lo > target and lo > 1e-300:
        lo /= 2.0
        h_lo = entropy_at(lo)
    while h_hi < target and hi < 1e300:
        hi *= 2.0
        h_hi = entropy_at(hi)
    if h_lo > target or h_hi < target:
        raise NumericalError(
            "failed to bracket the entropy multiplier: "
            f"H({lo:g})={h_lo:.12g}, H({hi:g})={h_hi:.12g}, target={target:.12g}"
        )

    for _ in range(_MAX_BISECT):
        mid = 0.5 * (lo + hi)
        h_mid = entropy_at(mid)
        if abs(h_mid - target) <= _ENTROPY_TOL:
            return mid
        if h_mid < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4.0 * np.finfo(float).eps * max(hi, 1e-300):
            # Bracket exhausted by floating point; accept if close enough.
            if abs(h_mid - target) <= 1e-8:
                return mid
            break
    raise NumericalError(
        "entropy bisection stalled: "
        f"bracket=[{lo:g}, {hi:g}], residual={abs(entropy_at(0.5 * (lo + hi)) - target):g}, "
        f"target={target:.12g}"
    )


def concentrated_objective(losses, solution: InnerSolution) -> float:
    """Weighted risk sum(pi*loss) at the optimal weights for these losses."""
    arr = _as_loss_array(losses)
    return float(np.dot(solution.weights.values, arr))
