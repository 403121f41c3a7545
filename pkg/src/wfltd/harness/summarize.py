"""Scalar metrics per learning curve and their medians across seeds."""
from __future__ import annotations

import io
import math
from pathlib import Path

import numpy as np

from .curves import LearningCurve

NEVER = math.inf


def _quantile(values, q: float) -> float:
    """Linear-interpolation quantile that treats ``inf`` as a value (no nan from inf - inf)."""
    x = np.sort(np.asarray(values, dtype=float))
    if x.size == 0:
        return math.nan
    pos = q * (x.size - 1)
    lo, hi = int(math.floor(pos)), int(math.ceil(pos))
    if lo == hi or x[lo] == x[hi]:
        return float(x[lo])
    return float(x[lo] + (x[hi] - x[lo]) * (pos - lo))


def median(values) -> float:
    return _quantile(values, 0.5)


def episodes_to_threshold(series, threshold: float, window: int = 10) -> float:
    """First episode index at which the trailing ``window``-episode mean reaches ``threshold``.

    Returns :data:`NEVER` (``inf``) when the threshold is never reached.
    """
    x = np.asarray(series, dtype=float)
    if x.size < window:
        return NEVER
    trailing = np.lib.stride_tricks.sliding_window_view(x, window).mean(axis=1)
    hits = np.flatnonzero(trailing >= threshold)
    return float(hits[0] + window - 1) if hits.size else NEVER


def curve_metrics(curve: LearningCurve, window: int = 20, threshold: float = 1.2,
                  threshold_window: int = 10) -> dict:
    rp = curve.column("r_plus_mean")
    rm = curve.column("r_minus_mean")
    return {
        "first_window_r_plus": float(np.mean(rp[:window])),
        "final_window_r_plus": float(np.mean(rp[-window:])),
        "worst_r_minus": float(np.min(rm)),
        "final_window_r_minus": float(np.mean(rm[-window:])),
        "episodes_to_threshold": episodes_to_threshold(rp, threshold, threshold_window),
    }


METRIC_NAMES = ("first_window_r_plus", "final_window_r_plus", "worst_r_minus", "final_window_r_minus",
                "episodes_to_threshold")


def summarize(curves_by_config: dict, window: int = 20, threshold: float = 1.2,
              threshold_window: int = 10) -> list[dict]:
    """One row per config: median, q25 and q75 of every metric across seeds.

    Rows also carry the per-seed values (``per_seed``) keyed by metric.
    """
    rows = []
    for name, curves in curves_by_config.items():
        curves = sorted(curves, key=lambda c: c.seed)
        per_seed = {m: [] for m in METRIC_NAMES}
        for c in curves:
            for m, v in curve_metrics(c, window, threshold, threshold_window).items():
                per_seed[m].append(v)
        row = {"config": name, "n_seeds": len(curves), "per_seed": per_seed}
        for m, vals in per_seed.items():
            row[m] = median(vals)
            row[m + "_q25"] = _quantile(vals, 0.25)
            row[m + "_q75"] = _quantile(vals, 0.75)
        rows.append(row)
    return rows


def _cell(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.4f}"


def format_table(rows) -> str:
    header = ["config", "n_seeds"] + [f"{m} [q25,q75]" for m in METRIC_NAMES]
    lines = ["\t".join(header)]
    for r in rows:
        cells = [r["config"], str(r["n_seeds"])]
        cells += [f"{_cell(r[m])} [{_cell(r[m + '_q25'])},{_cell(r[m + '_q75'])}]" for m in METRIC_NAMES]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def write_metrics_csv(path, rows) -> None:
    cols = ["config", "n_seeds"]
    for m in METRIC_NAMES:
        cols += [m, m + "_q25", m + "_q75"]
    buf = io.StringIO()
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join([r["config"], str(r["n_seeds"])] +
                           [("inf" if math.isinf(r[c]) else repr(float(r[c]))) for c in cols[2:]]) + "\n")
    Path(path).write_text(buf.getvalue())
