"""Learning-curve CSV files and their aggregation across seeds."""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

COLUMNS = ("episode", "r_plus_mean", "r_plus_sum", "r_minus_mean", "r_minus_sum")
METRICS = COLUMNS[1:]


@dataclass
class LearningCurve:
    """Per-episode reward aggregates of one seed."""

    seed: int
    data: np.ndarray  # shape (episodes, 4) in METRICS order
    config_hash: str = ""
    config_name: str = ""

    def __len__(self):
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.data[:, METRICS.index(name)]

    @classmethod
    def from_records(cls, seed: int, records, config_hash: str = "", config_name: str = ""):
        data = np.array([[r[m] for m in METRICS] for r in records], dtype=np.float64).reshape(-1, len(METRICS))
        return cls(seed, data, config_hash, config_name)


def _fmt(x: float) -> str:
    return repr(float(x))


def write_curve(path, curve: LearningCurve) -> None:
    buf = io.StringIO()
    buf.write(f"# config_hash={curve.config_hash} config={curve.config_name} seed={curve.seed}\n")
    buf.write(",".join(COLUMNS) + "\n")
    for i, row in enumerate(curve.data):
        buf.write(",".join([str(i)] + [_fmt(x) for x in row]) + "\n")
    Path(path).write_text(buf.getvalue())


def _parse_header(line: str) -> dict:
    return dict(tok.split("=", 1) for tok in line.lstrip("#").split() if "=" in tok)


def read_curve(path) -> LearningCurve:
    lines = Path(path).read_text().splitlines()
    meta = _parse_header(lines[0]) if lines and lines[0].startswith("#") else {}
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    if body[0].split(",") != list(COLUMNS):
        raise ValueError(f"{path}: unexpected columns {body[0]!r}")
    rows = np.array([[float(x) for x in ln.split(",")[1:]] for ln in body[1:]]).reshape(-1, len(METRICS))
    return LearningCurve(int(meta.get("seed", -1)), rows, meta.get("config_hash", ""), meta.get("config", ""))


def aggregate(curves) -> dict:
    """Median and interquartile band per episode for each metric.

    Curves are sorted by seed first, so the result does not depend on the
    order in which seeds finished.
    """
    curves = sorted(curves, key=lambda c: c.seed)
    if not curves:
        raise ValueError("no curves to aggregate")
    n = min(len(c) for c in curves)
    stack = np.stack([c.data[:n] for c in curves])  # seeds x episodes x metrics
    q25, med, q75 = np.percentile(stack, [25, 50, 75], axis=0)
    return {"episodes": n, "seeds": [c.seed for c in curves], "median": med, "q25": q25, "q75": q75}


def write_aggregate(path, agg: dict, config_hash: str = "", config_name: str = "") -> None:
    cols = ["episode"]
    for m in METRICS:
        cols += [f"{m}_median", f"{m}_q25", f"{m}_q75"]
    buf = io.StringIO()
    seeds = " ".join(str(s) for s in agg["seeds"])
    buf.write(f"# config_hash={config_hash} config={config_name} n_seeds={len(agg['seeds'])} seeds={seeds.replace(' ', ',')}\n")
    buf.write(",".join(cols) + "\n")
    for i in range(agg["episodes"]):
        row = [str(i)]
        for j in range(len(METRICS)):
            row += [_fmt(agg["median"][i, j]), _fmt(agg["q25"][i, j]), _fmt(agg["q75"][i, j])]
        buf.write(",".join(row) + "\n")
    Path(path).write_text(buf.getvalue())
