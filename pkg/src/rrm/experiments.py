"""Monte Carlo harness and the real-data classification pipeline.

Each experiment draws a contaminated dataset per trial, fits both the
plain empirical risk minimizer and the robust fit on the identical data,
scores them with the experiment's metric, and aggregates order
statistics per method. Trials whose solver fails are flagged and
excluded from the statistics, never dropped silently.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import datagen, metrics
from .exceptions import DegenerateDataError, NumericalError
from .models import (
    GAUSSIAN,
    LINEAR_REGRESSION,
    LOGISTIC_REGRESSION,
    PCA,
    LogRegParams,
)
from .solver import RrmConfig, RrmResult, erm_fit, rrm_fit
from .weights import RobustnessBound

ERM = "erm"
RRM = "rrm"

EXPERIMENT_DEFAULTS = {
    "linreg": {"n": 40, "d": 10, "eps": 0.20, "nu": 1.5, "sigma": 0.25, "eps_tilde": 0.40},
    "logreg": {"n": 100, "eps": 0.05, "eps_tilde": 0.30},
    "pca": {"n": 40, "eps": 0.20, "nu": 1.5, "sigma": 0.25, "eps_tilde": 0.40},
    "covariance": {"n": 50, "eps": 0.20, "nu": 1.5, "eps_tilde": 0.30},
}

# The corruption sweep uses a finite-variance corrupting distribution and
# a 9-point grid from clean to 40% corrupted.
SWEEP_EPS_GRID = tuple(round(0.05 * i, 2) for i in range(9))
SWEEP_NU = 2.5

EXPERIMENT_METRICS = {
    "linreg": "relative_error",
    "logreg": "angle_degrees",
    "pca": "misalignment",
    "covariance": "covariance_relative_error",
}


@dataclass(frozen=True)
class TrialResult:
    """One method's score on one Monte Carlo trial."""

    experiment: str
    method: str
    metric_name: str
    seed: int
    value: float
    excluded: bool
    dataset_hash: str
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.excluded and not math.isfinite(self.value):
            raise ValueError("a non-excluded trial must carry a finite value")


@dataclass(frozen=True)
class MethodStats:
    """Order statistics of one method's metric over the retained trials."""

    mean: float
    q25: float
    median: float
    q75: float
    min: float
    max: float
    count: int

    def __post_init__(self):
        if self.count > 0:
            ordered = (self.min, self.q25, self.median, self.q75, self.max)
            if any(a > b + 1e-12 for a, b in zip(ordered, ordered[1:])):
                raise ValueError(f"order statistics are inconsistent: {ordered}")

    @classmethod
    def from_values(cls, values) -> "MethodStats":
        arr = np.asarray(values, dtype=float)
        if arr.size == 0:
            return cls(math.nan, math.nan, math.nan, math.nan, math.nan, math.nan, 0)
        q25, q50, q75 = np.percentile(arr, [25.0, 50.0, 75.0])
        return cls(
            float(arr.mean()), float(q25), float(q50), float(q75),
            float(arr.min()), float(arr.max()), int(arr.size),
        )


@dataclass(frozen=True)
class ExperimentSummary:
    """Aggregated Monte Carlo statistics for one experiment."""

    experiment: str
    metric_name: str
    config: dict
    erm: MethodStats
    rrm: MethodStats
    excluded: dict

    @classmethod
    def from_trials(cls, experiment, metric_name, config, trials) -> "ExperimentSummary":
        stats = {}
        excluded = {}
        for method in (ERM, RRM):
            own = [t for t in trials if t.method == method]
            kept = [t.value for t in own if not t.excluded]
            stats[method] = MethodStats.from_values(kept)
            excluded[method] = sum(1 for t in own if t.excluded)
        return cls(experiment, metric_name, dict(config), stats[ERM], stats[RRM], excluded)


def dataset_digest(*arrays) -> str:
    """Stable hex digest of the given arrays (dtype, shape and bytes)."""
    h = hashlib.sha256()
    for arr in arrays:
        a = np.ascontiguousarray(arr)
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


def _resolve_config(name: str, overrides: dict | None) -> dict:
    if name not in EXPERIMENT_DEFAULTS:
        raise ValueError(
            f"unknown experiment {name!r}; valid names: {', '.join(sorted(EXPERIMENT_DEFAULTS))}"
        )
    config = dict(EXPERIMENT_DEFAULTS[name])
    for key, value in (overrides or {}).items():
        if key not in config:
            raise ValueError(
                f"unknown override {key!r} for experiment {name!r}; "
                f"valid keys: {', '.join(sorted(config))}"
            )
        config[key] = value
    return config


def _run_linreg_trial(rng, config):
    spec = datagen.LinRegSpec(
        eps=config["eps"], theta_star=np.ones(config["d"]),
        sigma=config["sigma"], nu=config["nu"],
    )
    X, y, _ = datagen.gen_linreg(rng, spec, config["n"])
    data = (X, y)
    digest = dataset_digest(X, y)

    def score(params):
        return metrics.relative_error(params.coefficients, spec.theta_star)

    return LINEAR_REGRESSION, data, digest, score


def _run_logreg_trial(rng, config):
    spec = datagen.LogRegSpec(eps=config["eps"])
    X, y, _ = datagen.gen_logreg(rng, spec, config["n"])
    data = (X, y)
    digest = dataset_digest(X, y)

    def score(params):
        return metrics.angle_degrees(params.coefficients, spec.theta_star)

    return LOGISTIC_REGRESSION, data, digest, score


def _run_pca_trial(rng, config):
    spec = datagen.PcaSpec(eps=config["eps"], sigma=config["sigma"], nu=config["nu"])
    Z, _ = datagen.gen_pca(rng, spec, config["n"])
    digest = dataset_digest(Z)

    def score(params):
        return metrics.misalignment(params.direction, spec.theta_star)

    return PCA, Z, digest, score


def _run_covariance_trial(rng, config):
    spec = datagen.CovarianceSpec(eps=config["eps"], nu=config["nu"])
    Z, _ = datagen.gen_covariance(rng, spec, config["n"])
    digest = dataset_digest(Z)

    def score(params):
        return metrics.covariance_relative_error(params.covariance, spec.sigma_star)

    return GAUSSIAN, Z, digest, score


_TRIAL_BUILDERS = {
    "linreg": _run_linreg_trial,
    "logreg": _run_logreg_trial,
    "pca": _run_pca_trial,
    "covariance": _run_covariance_trial,
}


def run_experiment(name: str, overrides: dict | None = None,
                   mc_runs: int = 100, base_seed: int = 0):
    """Run one Monte Carlo experiment; returns (summary, trials).

    Trial i is seeded with base_seed + i; both methods consume the
    identical dataset drawn under that seed. Solver failures mark the
    trial excluded (value NaN) instead of aborting the run.
    """
    if mc_runs < 1:
        raise ValueError("mc_runs must be at least 1")
    config = _resolve_config(name, overrides)
    metric_name = EXPERIMENT_METRICS[name]
    build = _TRIAL_BUILDERS[name]
    solver_config = RrmConfig(bound=RobustnessBound(config["eps_tilde"]))

    trials: list[TrialResult] = []
    for i in range(mc_runs):
        seed = base_seed + i
        rng = datagen.as_rng(seed)
        family, data, digest, score = build(rng, config)
        for method in (ERM, RRM):
            value, excluded = math.nan, True
            try:
                if method == ERM:
                    params = erm_fit(family, data)
                else:
                    params = rrm_fit(family, data, solver_config).params
                value, excluded = float(score(params)), False
            except (DegenerateDataError, NumericalError):
                pass
            trials.append(TrialResult(
                experiment=name, method=method, metric_name=metric_name,
                seed=seed, value=value, excluded=excluded,
                dataset_hash=digest, config=config,
            ))
    summary = ExperimentSummary.from_trials(name, metric_name, config, trials)
    return summary, trials


def run_linreg_sweep(eps_grid=SWEEP_EPS_GRID, overrides: dict | None = None,
                     mc_runs: int = 100, base_seed: int = 0):
    """Mean relative error per corruption level; returns (rows, trials).

    Rows are (eps, method, mean_relative_error) per method and level.
    Levels use disjoint seed blocks (base_seed + level*mc_runs + i) so no
    dataset repeats across levels. The corrupting distribution has
    nu = 2.5 unless overridden.
    """
    merged = dict(overrides or {})
    merged.setdefault("nu", SWEEP_NU)
    if "eps" in merged:
        raise ValueError("eps is set by the sweep grid; do not override it")
    rows = []
    all_trials = []
    for level, eps in enumerate(eps_grid):
        if not (0.0 <= eps < 1.0):
            raise ValueError(f"sweep eps values must lie in [0, 1), got {eps!r}")
        summary, trials = run_experiment(
            "linreg", {**merged, "eps": eps},
            mc_runs=mc_runs, base_seed=base_seed + level * mc_runs,
        )
        rows.append((eps, ERM, summary.erm.mean))
        rows.append((eps, RRM, summary.rrm.mean))
        all_trials.extend(trials)
    return rows, all_trials


# ---------------------------------------------------------------------------
# Real-data pipeline: train/test split, label flipping, logistic fits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts on a test split, label 1 taken as positive."""

    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be nonnegative")
        if self.total == 0:
            raise ValueError("confusion matrix cannot be empty")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionMatrix":
        t = np.asarray(y_true).astype(bool)
        p = np.asarray(y_pred).astype(bool)
        if t.shape != p.shape:
            raise ValueError("prediction shape mismatch")
        return cls(
            tp=int(np.sum(t & p)), fn=int(np.sum(t & ~p)),
            fp=int(np.sum(~t & p)), tn=int(np.sum(~t & ~p)),
        )


def _predict_logreg(params: LogRegParams, X: np.ndarray) -> np.ndarray:
    margins = params.coefficients[0] + X @ params.coefficients[1:]
    return (margins > 0.0).astype(int)


def run_real_data(csv_path, train_fraction: float = 0.6, flip_count: int = 40,
                  bound: RobustnessBound | None = None, seed: int = 0):
    """Label-flip corruption study on a features+label CSV.

    Shuffles with the given seed, trains on the first floor(fraction*n)
    rows with `flip_count` class-1 labels flipped to 0, and scores both
    logistic fits on the untouched test rows. Returns the pair of
    confusion matrices (ERM, RRM).
    """
    from .io import load_label_csv  # deferred to keep this module numpy-only

    if not (0.0 < train_fraction < 1.0):
        raise ValueError("train_fraction must lie in (0, 1)")
    if bound is None:
        bound = RobustnessBound(0.15)
    X, y = load_label_csv(csv_path)
    n = X.shape[0]
    n_train = int(train_fraction * n)
    if n_train < 2 or n - n_train < 1:
        raise ValueError(f"split leaves too few samples (n={n}, train={n_train})")

    rng = datagen.as_rng(seed)
    order = rng.permutation(n)
    train_idx, test_idx = order[:n_train], order[n_train:]
    X_train, y_train = X[train_idx], y[train_idx]
    X_test, y_test = X[test_idx], y[test_idx]
    y_corrupt, _ = datagen.flip_labels(rng, y_train, flip_count, from_label=1, to_label=0)

    data = (X_train, y_corrupt)
    erm_params = erm_fit(LOGISTIC_REGRESSION, data)
    rrm_result: RrmResult = rrm_fit(LOGISTIC_REGRESSION, data, RrmConfig(bound=bound))

    erm_cm = ConfusionMatrix.from_predictions(y_test, _predict_logreg(erm_params, X_test))
    rrm_cm = ConfusionMatrix.from_predictions(y_test, _predict_logreg(rrm_result.params, X_test))
    return erm_cm, rrm_cm
