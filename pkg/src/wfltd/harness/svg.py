"""Minimal SVG plotting: polylines with shaded bands, and banded contour maps."""
from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .curves import METRICS

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"]
W, H, PAD = 640, 240, 48


def _scale(lo, hi, a, b):
    span = (hi - lo) or 1.0
    return lambda x: a + (np.asarray(x, dtype=float) - lo) * (b - a) / span


def _points(xs, ys) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))


def _panel(series, y0: int, label: str) -> list[str]:
    """``series``: list of (name, x, median, q25, q75)."""
    lo = min(float(np.min(s[3])) for s in series)
    hi = max(float(np.max(s[4])) for s in series)
    xmax = max(float(s[1][-1]) for s in series) if series else 1.0
    sx = _scale(0.0, max(xmax, 1.0), PAD, W - PAD / 2)
    sy = _scale(lo, hi, y0 + H - PAD / 2, y0 + PAD / 2)
    out = [
        f'<rect x="{PAD}" y="{y0 + PAD / 2}" width="{W - 1.5 * PAD}" height="{H - PAD}" fill="none" stroke="#999"/>',
        f'<text x="{PAD}" y="{y0 + PAD / 2 - 6}" font-size="12">{escape(label)}</text>',
        f'<text x="4" y="{y0 + PAD / 2 + 10}" font-size="10">{hi:.3g}</text>',
        f'<text x="4" y="{y0 + H - PAD / 2}" font-size="10">{lo:.3g}</text>',
    ]
    for i, (name, x, med, q25, q75) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        band = _points(sx(x), sy(q75)) + " " + _points(sx(x[::-1]), sy(q25[::-1]))
        out.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        out.append(f'<polyline points="{_points(sx(x), sy(med))}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        out.append(f'<text x="{W - PAD * 2.5}" y="{y0 + PAD + 12 * i}" font-size="10" fill="{color}">{escape(name)}</text>')
    return out


def learning_curves_svg(aggs: dict, title: str = "") -> str:
    """Median and IQR of episodic mean r_plus (top) and r_minus (bottom) per config."""
    ip, im = METRICS.index("r_plus_mean"), METRICS.index("r_minus_mean")
    plus, minus = [], []
    for name, agg in aggs.items():
        x = np.arange(agg["episodes"], dtype=float)
        plus.append((name, x, agg["median"][:, ip], agg["q25"][:, ip], agg["q75"][:, ip]))
        minus.append((name, x, agg["median"][:, im], agg["q25"][:, im], agg["q75"][:, im]))
    body = [f'<text x="{PAD}" y="16" font-size="14">{escape(title)}</text>']
    body += _panel(plus, 20, "episodic mean r+")
    body += _panel(minus, 20 + H, "episodic mean r-")
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{2 * H + 30}">\n'
            + "\n".join(body) + "\n</svg>\n")


def learning_curve_svg(agg: dict, title: str = "") -> str:
    return learning_curves_svg({title or "median": agg}, title)


def _band_color(t: float) -> str:
    # diverging blue-white-red on t in [-1, 1]
    t = max(-1.0, min(1.0, t))
    if t >= 0:
        r, g, b = 255, int(255 * (1 - t)), int(255 * (1 - t))
    else:
        r, g, b = int(255 * (1 + t)), int(255 * (1 + t)), 255
    return f"#{r:02x}{g:02x}{b:02x}"


def contour_svg(v_grid, q_grid, weights, n_levels: int = 10, title: str = "", size: int = 360) -> str:
    """Banded map of ``weights[i, j]`` at ``(v_grid[i], q_grid[j])``; V on x, Q on y."""
    weights = np.asarray(weights, dtype=float)
    finite = weights[np.isfinite(weights)]
    vmax = float(np.max(np.abs(finite))) if finite.size else 1.0
    vmax = vmax or 1.0
    step = vmax / n_levels
    nv, nq = weights.shape
    cw, ch = size / nv, size / nq
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 2 * PAD}" height="{size + 2 * PAD}">',
           f'<text x="{PAD}" y="16" font-size="13">{escape(title)}</text>']
    for i in range(nv):
        for j in range(nq):
            w = weights[i, j]
            if not np.isfinite(w):
                continue
            band = np.floor(w / step + 0.5) * step
            x = PAD + i * cw
            y = PAD + (nq - 1 - j) * ch
            out.append(f'<rect x="{x:.2f}" y="{y:.2f}" width="{cw + 0.05:.2f}" height="{ch + 0.05:.2f}" '
                       f'fill="{_band_color(band / vmax)}"/>')
    out.append(f'<line x1="{PAD}" y1="{PAD + size}" x2="{PAD + size}" y2="{PAD}" stroke="#444" stroke-dasharray="4 3"/>')
    out.append(f'<text x="{PAD + size / 2 - 6}" y="{PAD + size + 20}" font-size="12">V</text>')
    out.append(f'<text x="{PAD - 24}" y="{PAD + size / 2}" font-size="12">Q</text>')
    out.append(f'<text x="{PAD}" y="{PAD + size + 36}" font-size="10">'
               f'V: [{v_grid[0]:.3g}, {v_grid[-1]:.3g}]  Q: [{q_grid[0]:.3g}, {q_grid[-1]:.3g}]  '
               f'band width {step:.3g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
