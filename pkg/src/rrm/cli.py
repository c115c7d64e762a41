"""Command-line front end: fits, experiment reproduction, diagnostics.

Flag values override config-file values, which override the built-in
defaults, so reproducing the stock experiments needs no configuration at
all. The config file is a flat JSON object whose keys equal the long
flag names with dashes replaced by underscores. Exit codes: 0 success,
1 I/O or malformed input file, 2 invalid arguments or configuration,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import io
from .exceptions import DataFormatError, DegenerateDataError, NumericalError
from .experiments import (
    EXPERIMENT_DEFAULTS,
    SWEEP_EPS_GRID,
    SWEEP_NU,
    run_experiment,
    run_linreg_sweep,
    run_real_data,
)
from .models import MODEL_FAMILIES
from .solver import RrmConfig, rrm_fit
from .weights import RobustnessBound, solve_inner

OUTPUT_DIR_ENV = "RRM_OUTPUT_DIR"

_COMMON_DEFAULTS = {
    "seed": 0,
    "format": "json",
    "out": None,
    "out_dir": None,
    "mc_runs": 100,
    "max_outer_iterations": 500,
    "objective_rel_tolerance": 1e-8,
    "train_fraction": 0.6,
    "flip_count": 40,
    "eps_grid": ",".join(str(e) for e in SWEEP_EPS_GRID),
    "nu": None,
    "eps_tilde": None,
}

_DEFAULTS_TABLE = """\
built-in defaults (v1):
  experiment linreg:      n=40  d=10  eps=0.20  nu=1.5  sigma=0.25  eps_tilde=0.40
  experiment logreg:      n=100 eps=0.05  eps_tilde=0.30
  experiment pca:         n=40  eps=0.20  nu=1.5  sigma=0.25  eps_tilde=0.40
  experiment covariance:  n=50  eps=0.20  nu=1.5  eps_tilde=0.30
  sweep:                  nu=2.5  eps grid 0,0.05,...,0.40  eps_tilde=0.40
  real-data:              train_fraction=0.6  flip_count=40  eps_tilde=0.15
  solver:                 max 500 outer iterations, relative tolerance 1e-8
config file: flat JSON object, keys = long flag names with underscores
  (e.g. {"seed": 7, "eps_tilde": 0.4, "mc_runs": 100})
environment: RRM_OUTPUT_DIR sets the default output directory
"""


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rrm",
        description="Robust risk minimization: fitting, experiments, diagnostics.",
        epilog=_DEFAULTS_TABLE,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, help="random seed (default 0)")
        p.add_argument("--format", choices=("json", "csv"), help="output format (default json)")

    p_fit = sub.add_parser("fit", help="robust fit of one model family on a CSV dataset")
    p_fit.add_argument("model", choices=sorted(MODEL_FAMILIES))
    p_fit.add_argument("data_csv")
    p_fit.add_argument("--eps-tilde", type=float, help="upper bound on the corrupted fraction")
    p_fit.add_argument("--out", help="output file (default <outdir>/fit_<model>.<format>)")
    p_fit.add_argument("--max-outer-iterations", type=int)
    p_fit.add_argument("--objective-rel-tolerance", type=float)
    add_common(p_fit)

    p_exp = sub.add_parser("experiment", help="Monte Carlo comparison of ERM and RRM")
    p_exp.add_argument("name", help=f"one of: {', '.join(sorted(EXPERIMENT_DEFAULTS))}")
    p_exp.add_argument("--mc-runs", type=int, help="Monte Carlo trials (default 100)")
    p_exp.add_argument("--out-dir", help="directory for trial/summary files")
    p_exp.add_argument("--n", type=int, help="samples per trial")
    p_exp.add_argument("--eps", type=float, help="true corruption fraction")
    p_exp.add_argument("--nu", type=float, help="corrupting t-distribution dof")
    p_exp.add_argument("--sigma", type=float, help="clean noise standard deviation")
    p_exp.add_argument("--eps-tilde", type=float, help="corruption bound used by the solver")
    add_common(p_exp)

    p_sweep = sub.add_parser("sweep", help="linear-regression error vs corruption level")
    p_sweep.add_argument("--mc-runs", type=int, help="Monte Carlo trials per level (default 100)")
    p_sweep.add_argument("--out-dir", help="directory for the sweep CSV")
    p_sweep.add_argument("--eps-grid", help="comma-separated corruption levels")
    p_sweep.add_argument("--nu", type=float, help=f"corrupting t dof (default {SWEEP_NU})")
    p_sweep.add_argument("--eps-tilde", type=float)
    p_sweep.add_argument("--n", type=int)
    p_sweep.add_argument("--sigma", type=float)
    add_common(p_sweep)

    p_real = sub.add_parser("real-data", help="label-flip corruption study on a labeled CSV")
    p_real.add_argument("data_csv")
    p_real.add_argument("--train-fraction", type=float)
    p_real.add_argument("--flip-count", type=int)
    p_real.add_argument("--eps-tilde", type=float, help="corruption bound (default 0.15)")
    p_real.add_argument("--out", help="optional JSON/CSV output file")
    add_common(p_real)

    p_inner = sub.add_parser("inner-solve", help="entropy-constrained weights for a loss file")
    p_inner.add_argument("losses_csv", help="one loss value per line")
    p_inner.add_argument("--eps-tilde", type=float, required=True)
    add_common(p_inner)

    return parser


class _Settings:
    """Flag > config file > built-in default resolution."""

    def __init__(self, args: argparse.Namespace):
        self.args = vars(args)
        self.config = {}
        path = self.args.get("config")
        if path:
            try:
                with open(path) as handle:
                    self.config = json.load(handle)
            except json.JSONDecodeError as err:
                raise DataFormatError(f"{path}: invalid JSON config ({err})") from None
            if not isinstance(self.config, dict):
                raise DataFormatError(f"{path}: config must be a JSON object")

    def get(self, key: str, default=None):
        value = self.args.get(key)
        if value is not None:
            return value
        if key in self.config:
            return self.config[key]
        if key in _COMMON_DEFAULTS and _COMMON_DEFAULTS[key] is not None:
            return _COMMON_DEFAULTS[key]
        return default

    def require(self, key: str):
        value = self.get(key)
        if value is None:
            raise ValueError(f"missing required setting {key.replace('_', '-')!r}")
        return value


def _output_dir(settings: _Settings) -> Path:
    out_dir = settings.get("out_dir") or os.environ.get(OUTPUT_DIR_ENV) or "."
    return Path(out_dir)


def _write_payload(path: Path, payload: dict, fmt: str) -> None:
    if fmt == "json":
        io.write_json(path, payload)
    else:
        io.write_flat_csv(path, io.flatten_payload(payload))


def _params_payload(model: str, params) -> dict:
    if model in ("linreg", "logreg"):
        return {"coefficients": list(params.coefficients)}
    if model == "pca":
        return {"direction": list(params.direction)}
    return {
        "mean": list(params.mean),
        "covariance": [list(row) for row in params.covariance],
    }


def _cmd_fit(settings: _Settings) -> int:
    model = settings.args["model"]
    family = MODEL_FAMILIES[model]
    path = settings.args["data_csv"]
    if model == "linreg":
        data = io.load_xy_csv(path)
    elif model == "logreg":
        data = io.load_label_csv(path)
    else:
        data = io.load_matrix_csv(path)

    eps_tilde = float(settings.require("eps_tilde"))
    config = RrmConfig(
        bound=RobustnessBound(eps_tilde),
        max_outer_iterations=int(settings.get("max_outer_iterations")),
        objective_rel_tolerance=float(settings.get("objective_rel_tolerance")),
    )
    result = rrm_fit(family, data, config)

    fmt = settings.get("format")
    out = settings.get("out")
    out_path = Path(out) if out else _output_dir(settings) / f"fit_{model}.{fmt}"
    payload = {
        "model": model,
        "eps_tilde": eps_tilde,
        "params": _params_payload(model, result.params),
        "weights": list(result.weights.values),
        "lambda_star": result.lambda_star,
        "converged": result.converged,
        "trace": [{"iteration": k, "objective": obj, "entropy": ent}
                  for k, obj, ent in result.trace],
    }
    _write_payload(out_path, payload, fmt)
    print(f"wrote {out_path}")
    return 0


def _cmd_experiment(settings: _Settings) -> int:
    name = settings.args["name"]
    overrides = {}
    for key in ("n", "eps", "nu", "sigma", "eps_tilde"):
        value = settings.get(key)
        if value is not None:
            overrides[key] = value
    summary, trials = run_experiment(
        name, overrides or None,
        mc_runs=int(settings.get("mc_runs")),
        base_seed=int(settings.get("seed")),
    )
    out_dir = _output_dir(settings)
    trials_path = out_dir / f"{name}_trials.csv"
    summary_path = out_dir / f"{name}_summary.json"
    io.write_trials_csv(trials_path, trials)
    io.write_summary_json(summary_path, summary)
    print(f"wrote {trials_path}")
    print(f"wrote {summary_path}")
    print(f"{name}: mean[erm]={summary.erm.mean!r} mean[rrm]={summary.rrm.mean!r} "
          f"excluded={summary.excluded}")
    return 0


def _parse_eps_grid(raw) -> tuple:
    if isinstance(raw, (list, tuple)):
        return tuple(float(e) for e in raw)
    try:
        grid = tuple(float(tok) for tok in str(raw).split(",") if tok.strip())
    except ValueError:
        raise ValueError(f"invalid eps grid {raw!r}; expected comma-separated numbers") from None
    if not grid:
        raise ValueError("eps grid must contain at least one level")
    return grid


def _cmd_sweep(settings: _Settings) -> int:
    overrides = {}
    for key in ("n", "nu", "sigma", "eps_tilde"):
        value = settings.get(key)
        if value is not None:
            overrides[key] = value
    rows, _ = run_linreg_sweep(
        eps_grid=_parse_eps_grid(settings.get("eps_grid")),
        overrides=overrides or None,
        mc_runs=int(settings.get("mc_runs")),
        base_seed=int(settings.get("seed")),
    )
    out_dir = _output_dir(settings)
    sweep_path = out_dir / "linreg_sweep.csv"
    io.write_sweep_csv(sweep_path, rows)
    print(f"wrote {sweep_path}")
    return 0


def _confusion_payload(cm) -> dict:
    return {"tp": cm.tp, "fn": cm.fn, "fp": cm.fp, "tn": cm.tn, "accuracy": cm.accuracy}


def _cmd_real_data(settings: _Settings) -> int:
    eps_tilde = settings.get("eps_tilde")
    bound = RobustnessBound(float(eps_tilde) if eps_tilde is not None else 0.15)
    erm_cm, rrm_cm = run_real_data(
        settings.args["data_csv"],
        train_fraction=float(settings.get("train_fraction")),
        flip_count=int(settings.get("flip_count")),
        bound=bound,
        seed=int(settings.get("seed")),
    )
    for label, cm in (("erm", erm_cm), ("rrm", rrm_cm)):
        print(f"{label}: tp={cm.tp} fn={cm.fn} fp={cm.fp} tn={cm.tn} "
              f"accuracy={cm.accuracy:.4f} (n={cm.total})")
    out = settings.get("out")
    if out:
        payload = {"erm": _confusion_payload(erm_cm), "rrm": _confusion_payload(rrm_cm)}
        _write_payload(Path(out), payload, settings.get("format"))
        print(f"wrote {out}")
    return 0


def _cmd_inner_solve(settings: _Settings) -> int:
    losses = io.load_losses_csv(settings.args["losses_csv"])
    bound = RobustnessBound(float(settings.require("eps_tilde")))
    solution = solve_inner(losses, bound)
    target = bound.target_entropy(losses.size)
    print("weights:", " ".join(repr(w) for w in solution.weights.values))
    print(f"lambda_star: {solution.lambda_star!r}")
    print(f"achieved_entropy: {solution.achieved_entropy!r}")
    print(f"target_entropy: {target!r}")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "experiment": _cmd_experiment,
    "sweep": _cmd_sweep,
    "real-data": _cmd_real_data,
    "inner-solve": _cmd_inner_solve,
}


def _fail(code: int, category: str, err: Exception) -> int:
    message = " ".join(str(err).split())
    print(f"error: {category}: {message}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        settings = _Settings(args)
        return _COMMANDS[args.command](settings)
    except DataFormatError as err:
        return _fail(1, "data-format", err)
    except OSError as err:
        return _fail(1, "io", err)
    except (DegenerateDataError, NumericalError) as err:
        return _fail(3, "numerical", err)
    except ValueError as err:
        return _fail(2, "validation", err)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
