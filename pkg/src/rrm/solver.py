"""Blockwise coordinate descent over parameters and sample weights.

Alternates an exact weighted fit of the model parameters with the exact
entropy-constrained reweighting, starting from uniform weights, until the
weighted objective stops decreasing.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateDataError, NumericalError
from .models import ModelFamily
from .weights import InnerSolution, RobustnessBound, Weights, solve_inner


@dataclass(frozen=True)
class RrmConfig:
    """Settings for one robust fit."""

    bound: RobustnessBound
    max_outer_iterations: int = 500
    objective_rel_tolerance: float = 1e-8
    record_trace: bool = True

    def __post_init__(self):
        if self.max_outer_iterations < 1:
            raise ValueError("max_outer_iterations must be at least 1")
        if not (self.objective_rel_tolerance > 0.0):
            raise ValueError("objective_rel_tolerance must be positive")


@dataclass(frozen=True)
class RrmResult:
    """Fitted parameters, final weights, and the per-iteration trace.

    Trace entries are (iteration, objective, entropy) triples recorded
    after each reweighting step; objectives are non-increasing along the
    trace. `converged` is False when the iteration cap was hit first.
    """

    params: object
    weights: Weights
    lambda_star: float
    converged: bool
    trace: tuple = field(default_factory=tuple)


def erm_fit(family: ModelFamily, data):
    """Empirical risk minimizer: the weighted fit under uniform weights."""
    n = family.n_samples(data)
    return family.weighted_fit(data, Weights.uniform(n))


def rrm_fit(family: ModelFamily, data, config: RrmConfig) -> RrmResult:
    """Robust fit by alternating exact parameter and weight updates.

    Starts from uniform weights and iterates: fit parameters to the
    current weights, then re-solve the inner weight problem for the new
    losses. Stops when the relative change of the weighted objective
    falls below the configured tolerance or the iteration cap is hit.
    With a zero corruption bound the weights are pinned at uniform, so a
    single parameter step (the ERM fit) is returned directly.
    """
    n = family.n_samples(data)
    if n < 2:
        raise ValueError("rrm_fit needs at least two samples")
    bound = config.bound
    bound.check_sample_size(n)
    effective = (1.0 - bound.eps_tilde) * n
    dim = family.param_dimension(data)
    if effective < dim:
        warnings.warn(
            f"effective sample size {effective:.1f} is below the parameter dimension {dim}; "
            "the fit may be underdetermined",
            RuntimeWarning,
            stacklevel=2,
        )

    uniform = Weights.uniform(n)
    if bound.eps_tilde == 0.0:
        params = family.weighted_fit(data, uniform)
        losses = family.per_sample_losses(params, data)
        objective = float(np.mean(losses))
        trace = ((1, objective, math.log(n)),) if config.record_trace else ()
        return RrmResult(params, uniform, 0.0, True, trace)

    weights = uniform
    params = None
    solution: InnerSolution | None = None
    prev_objective: float | None = None
    converged = False
    trace: list[tuple[int, float, float]] = []
    tol = config.objective_rel_tolerance

    for iteration in range(1, config.max_outer_iterations + 1):
        try:
            params = family.weighted_fit(data, weights, init=params)
            losses = family.per_sample_losses(params, data)
            solution = solve_inner(losses, bound)
        except (DegenerateDataError, NumericalError) as err:
            err.args = (f"outer iteration {iteration}: {err.args[0]}",) + err.args[1:]
            raise
        weights = solution.weights
        objective = float(np.dot(weights.values, losses))
        if config.record_trace:
            trace.append((iteration, objective, solution.achieved_entropy))
        if prev_objective is not None and (
            abs(prev_objective - objective) <= tol * max(1.0, abs(prev_objective))
        ):
            converged = True
            break
        prev_objective = objective

    return RrmResult(params, weights, solution.lambda_star, converged, tuple(trace))
