"""Update-weight fields over a (V, Q) grid for a fixed mixing coefficient."""
from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..core import LowerBound, UpperBound, WflParams, update_weight
from .svg import contour_svg

DEFAULT_LAMBDAS = (0.1, 0.5, 0.9)


@dataclass
class ContourField:
    lam: float
    bound: object
    v: np.ndarray
    q: np.ndarray
    weights: np.ndarray  # weights[i, j] at (v[i], q[j])

    @property
    def beta(self) -> float:
        return 1.0 / self.lam - 1.0


def grid_axis(bound, resolution: int, lo: float = -1.0, hi: float = 1.0) -> np.ndarray:
    """Points ``lo + k h`` strictly inside the part of ``(lo, hi)`` admissible for ``bound``."""
    if isinstance(bound, UpperBound):
        hi = min(hi, bound.value)
    else:
        lo = max(lo, bound.value)
    if not hi > lo:
        raise ValueError("grid range does not intersect the admissible side of the bound")
    h = (hi - lo) / resolution
    return lo + h * np.arange(1, resolution)


def emit_contour_field(lam: float, bound=UpperBound(1.0), resolution: int = 200,
                       lo: float = -1.0, hi: float = 1.0) -> ContourField:
    """Matrix of update weights over V, Q in ``(lo, hi)`` with ``beta = 1/lam - 1``."""
    if not 0.0 < lam < 1.0:
        raise ValueError(f"lambda must lie in (0, 1), got {lam}; use a beta0=inf sweep for lambda=0")
    params = WflParams(1.0 / lam - 1.0)
    axis = grid_axis(bound, resolution, lo, hi)
    V, Q = np.meshgrid(axis, axis, indexing="ij")
    return ContourField(lam, bound, axis, axis.copy(), update_weight(V, Q, params, bound))


def _bound_label(bound) -> str:
    kind = "upper" if isinstance(bound, UpperBound) else "lower"
    return f"{kind}({bound.value!r})"


def write_contour_csv(path, field: ContourField) -> None:
    buf = io.StringIO()
    buf.write(f"# lambda={field.lam!r} beta={field.beta!r} bound={_bound_label(field.bound)}\n")
    buf.write("v\\q," + ",".join(repr(float(x)) for x in field.q) + "\n")
    for i, v in enumerate(field.v):
        buf.write(repr(float(v)) + "," + ",".join(repr(float(w)) for w in field.weights[i]) + "\n")
    Path(path).write_text(buf.getvalue())


def read_contour_csv(path) -> ContourField:
    lines = Path(path).read_text().splitlines()
    meta = dict(tok.split("=", 1) for tok in lines[0].lstrip("#").split())
    q = np.array([float(x) for x in lines[1].split(",")[1:]])
    rows = np.array([[float(x) for x in ln.split(",")] for ln in lines[2:]])
    kind, value = meta["bound"].rstrip(")").split("(")
    bound = UpperBound(float(value)) if kind == "upper" else LowerBound(float(value))
    return ContourField(float(meta["lambda"]), bound, rows[:, 0], q, rows[:, 1:])


def emit_contours(out_dir, lambdas=DEFAULT_LAMBDAS, bound=UpperBound(1.0), resolution: int = 200,
                  lo: float = -1.0, hi: float = 1.0) -> list[Path]:
    """Write ``contour_<kind>_lambda<lam>.csv`` and a matching ``.svg`` per lambda."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kind = "upper" if isinstance(bound, UpperBound) else "lower"
    written = []
    for lam in lambdas:
        field = emit_contour_field(lam, bound, resolution, lo, hi)
        # not Path.with_suffix: the "." in "lambda0.5" is not an extension
        csv_path = out_dir / f"contour_{kind}_lambda{lam:g}.csv"
        svg_path = out_dir / f"contour_{kind}_lambda{lam:g}.svg"
        write_contour_csv(csv_path, field)
        title = f"lambda={lam:g}, {_bound_label(bound)}"
        svg_path.write_text(contour_svg(field.v, field.q, field.weights, title=title))
        written += [csv_path, svg_path]
    return written
