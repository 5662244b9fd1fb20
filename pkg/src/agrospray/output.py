"""Deterministic CSV and SVG emission for solved trajectories.

CSV columns are exactly ``t, f, s, v, u, lambda1, lambda2, lambda3``
with '.' decimal separator, 12 significant digits and newline-terminated
rows.  SVG plots are hand-assembled (fixed viewport, one polyline per
series, axes and title) so repeated runs are byte-identical.
"""

from __future__ import annotations

import numpy as np

__all__ = ["CSV_HEADER", "format_number", "render_csv", "write_csv",
           "parse_csv", "render_svg", "write_svg"]

CSV_HEADER = "t,f,s,v,u,lambda1,lambda2,lambda3"

_WIDTH, _HEIGHT = 640, 420
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 62, 18, 38, 46


def format_number(x: float) -> str:
    """12 significant digits, shortest form ('%.12g')."""
    return "%.12g" % x


def render_csv(t, states, u, adjoints) -> str:
    """CSV text for a trajectory; states and adjoints are (N, 3)."""
    t = np.asarray(t, dtype=float)
    states = np.asarray(states, dtype=float)
    u = np.asarray(u, dtype=float)
    adjoints = np.asarray(adjoints, dtype=float)
    n = t.size
    if states.shape != (n, 3) or adjoints.shape != (n, 3) \
            or u.shape != (n,):
        raise ValueError("column arrays disagree on the number of rows")
    lines = [CSV_HEADER]
    for i in range(n):
        row = (t[i], states[i, 0], states[i, 1], states[i, 2], u[i],
               adjoints[i, 0], adjoints[i, 1], adjoints[i, 2])
        lines.append(",".join(format_number(x) for x in row))
    return "\n".join(lines) + "\n"


def write_csv(path, t, states, u, adjoints) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(render_csv(t, states, u, adjoints))
    except OSError as err:
        raise OSError(f"cannot write CSV {path!r}: {err}") from err


def parse_csv(text: str):
    """Inverse of render_csv: returns (t, states, u, adjoints)."""
    lines = [ln for ln in text.split("\n") if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or malformed CSV header")
    rows = np.array([[float(x) for x in ln.split(",")]
                     for ln in lines[1:]], dtype=float)
    if rows.size == 0:
        rows = rows.reshape(0, 8)
    if rows.shape[1] != 8:
        raise ValueError("CSV rows must have 8 columns")
    return rows[:, 0], rows[:, 1:4], rows[:, 4], rows[:, 5:8]


def _ticks(lo: float, hi: float, count: int = 5):
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def render_svg(title: str, xs, ys, x_label: str = "t",
               y_label: str = "") -> str:
    """A single-series line plot with axes, tick labels and a title."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("x and y series must be 1-d and equally long")
    x_lo, x_hi = (float(xs.min()), float(xs.max())) if xs.size else (0.0, 1.0)
    y_lo, y_hi = (float(ys.min()), float(ys.max())) if ys.size else (0.0, 1.0)
    if y_hi - y_lo < 1e-12:
        pad = max(0.5, abs(y_hi) * 0.1)
        y_lo, y_hi = y_lo - pad, y_hi + pad
    if x_hi - x_lo < 1e-12:
        x_hi = x_lo + 1.0
    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x):
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y):
        return _MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<text x="{_WIDTH // 2}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    # axes
    x0, y0 = _MARGIN_L, _MARGIN_T + plot_h
    parts.append(f'<line x1="{x0}" y1="{_MARGIN_T}" x2="{x0}" y2="{y0}" '
                 'stroke="black" stroke-width="1"/>')
    parts.append(f'<line x1="{x0}" y1="{y0}" x2="{_MARGIN_L + plot_w}" '
                 f'y2="{y0}" stroke="black" stroke-width="1"/>')
    for tx in _ticks(x_lo, x_hi):
        px = sx(tx)
        parts.append(f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" '
                     f'y2="{y0 + 5}" stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{px:.2f}" y="{y0 + 20}" '
                     'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="11">{format_number(round(tx, 10))}</text>')
    for ty in _ticks(y_lo, y_hi):
        py = sy(ty)
        parts.append(f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" '
                     f'y2="{py:.2f}" stroke="black" stroke-width="1"/>')
        parts.append(f'<text x="{x0 - 8}" y="{py + 4:.2f}" '
                     'text-anchor="end" font-family="sans-serif" '
                     f'font-size="11">{format_number(round(ty, 10))}</text>')
    parts.append(f'<text x="{_MARGIN_L + plot_w // 2}" '
                 f'y="{_HEIGHT - 8}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13">{x_label}</text>')
    if y_label:
        parts.append(f'<text x="16" y="{_MARGIN_T + plot_h // 2}" '
                     'text-anchor="middle" font-family="sans-serif" '
                     f'font-size="13" transform="rotate(-90 16 '
                     f'{_MARGIN_T + plot_h // 2})">{y_label}</text>')
    if xs.size:
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{pts}" fill="none" '
                     'stroke="#1f6fb2" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, title, xs, ys, x_label: str = "t",
              y_label: str = "") -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(render_svg(title, xs, ys, x_label, y_label))
    except OSError as err:
        raise OSError(f"cannot write SVG {path!r}: {err}") from err
