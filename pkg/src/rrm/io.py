"""CSV and JSON readers/writers for datasets and experiment artifacts.

Readers auto-detect an optional header row and report malformed content
with one-based line numbers. Writers are deterministic: sorted JSON
keys, shortest round-trip float formatting, LF newlines, no timestamps.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import DataFormatError

TRIALS_CSV_COLUMNS = ("experiment", "method", "metric", "seed", "value",
                      "excluded_flag", "dataset_hash")
SWEEP_CSV_COLUMNS = ("eps", "method", "mean_relative_error")


def _parse_numeric_rows(path) -> list[list[float]]:
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with open(path, newline="") as handle:
        for lineno, raw in enumerate(csv.reader(handle), start=1):
            if not raw or all(not cell.strip() for cell in raw):
                continue
            try:
                row = [float(cell) for cell in raw]
            except ValueError:
                if lineno == 1 and rows == []:
                    continue  # header row
                raise DataFormatError(
                    f"{path}: row {lineno} contains a non-numeric field"
                ) from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataFormatError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {width}"
                )
            rows.append(row)
    if not rows:
        raise ValueError(f"{path}: no data rows found")
    return rows


def load_matrix_csv(path) -> np.ndarray:
    """All-numeric CSV as a 2-d sample matrix."""
    return np.asarray(_parse_numeric_rows(path), dtype=float)


def load_xy_csv(path):
    """Features plus a final numeric outcome column."""
    mat = load_matrix_csv(path)
    if mat.shape[1] < 2:
        raise DataFormatError(f"{path}: need at least one feature column plus the outcome")
    return mat[:, :-1], mat[:, -1]


def load_label_csv(path):
    """Features plus a final binary {0, 1} label column."""
    X, y = load_xy_csv(path)
    if not np.all((y == 0.0) | (y == 1.0)):
        bad = int(np.flatnonzero((y != 0.0) & (y != 1.0))[0])
        raise DataFormatError(
            f"{path}: label column must be 0/1; data row {bad + 1} has {y[bad]!r}"
        )
    return X, y


def load_losses_csv(path) -> np.ndarray:
    """One loss value per line."""
    mat = load_matrix_csv(path)
    if mat.shape[1] != 1:
        raise DataFormatError(f"{path}: expected one loss per line, got {mat.shape[1]} columns")
    return mat[:, 0]


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trials_csv(path, trials) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(TRIALS_CSV_COLUMNS)
        for t in trials:
            writer.writerow([
                t.experiment, t.method, t.metric_name, t.seed,
                _fmt(t.value), int(t.excluded), t.dataset_hash,
            ])


def read_trials_csv(path) -> list[dict]:
    """Raw trial rows back as dicts with parsed numeric fields."""
    with open(Path(path), newline="") as handle:
        reader = csv.DictReader(handle)
        rows = []
        for row in reader:
            rows.append({
                "experiment": row["experiment"],
                "method": row["method"],
                "metric": row["metric"],
                "seed": int(row["seed"]),
                "value": float(row["value"]),
                "excluded_flag": int(row["excluded_flag"]),
                "dataset_hash": row["dataset_hash"],
            })
    return rows


def _stats_dict(stats) -> dict:
    return {
        "mean": stats.mean, "q25": stats.q25, "median": stats.median,
        "q75": stats.q75, "min": stats.min, "max": stats.max, "count": stats.count,
    }


def write_summary_json(path, summary) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "experiment": summary.experiment,
        "metric": summary.metric_name,
        "config": summary.config,
        "erm": _stats_dict(summary.erm),
        "rrm": _stats_dict(summary.rrm),
        "excluded": summary.excluded,
    }
    with open(path, "w", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_sweep_csv(path, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(SWEEP_CSV_COLUMNS)
        for eps, method, value in rows:
            writer.writerow([_fmt(float(eps)), method, _fmt(float(value))])


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_flat_csv(path, items) -> None:
    """(key, value) rows; the flat CSV rendering of a nested payload."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(("key", "value"))
        for key, value in items:
            writer.writerow([key, _fmt(value)])


def flatten_payload(payload, prefix: str = "") -> list[tuple]:
    """Depth-first (dotted.key, scalar) pairs of a nested dict/list payload."""
    items: list[tuple] = []
    if isinstance(payload, dict):
        for key in payload:
            items.extend(flatten_payload(payload[key], f"{prefix}{key}."))
    elif isinstance(payload, (list, tuple)):
        for i, value in enumerate(payload):
            items.extend(flatten_payload(value, f"{prefix}{i}."))
    else:
        items.append((prefix[:-1], payload))
    return items
