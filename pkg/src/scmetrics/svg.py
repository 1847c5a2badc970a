"""Log-log CCDF plots as self-contained SVG text.

Output depends only on the inputs: no timestamps, ids or random state, and
every coordinate is printed with two decimals.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 480
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 20, 60
COLORS = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd")


def _decades(lo: float, hi: float) -> tuple[int, int]:
    a = math.floor(math.log10(lo))
    b = math.ceil(math.log10(hi))
    if a == b:
        b += 1
    return a, b


def _fmt_power(e: int) -> str:
    return f"1e{e}" if e < -2 or e > 4 else f"{10.0 ** e:g}"


def loglog_svg(
    x: Sequence[float],
    g: Sequence[float],
    curves: Sequence[tuple[str, Callable[[np.ndarray], np.ndarray], float, float]] = (),
    title: Optional[str] = None,
) -> str:
    """Render empirical points and model curves on log-log axes.

    ``curves`` holds ``(label, ccdf, x_start, x_stop)`` tuples; each curve is
    sampled at 200 log-spaced points and drawn where it stays inside the axes.
    ``x`` and ``g`` must already be strictly positive.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(g, dtype=float)
    if x.size == 0:
        raise ValueError("nothing to plot")
    x_lo, x_hi = _decades(x.min(), x.max())
    g_lo, g_hi = _decades(g.min(), g.max())
    pw = WIDTH - LEFT - RIGHT
    ph = HEIGHT - TOP - BOTTOM

    def px(v):
        return LEFT + (np.log10(v) - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return TOP + (g_hi - np.log10(v)) / (g_hi - g_lo) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for e in range(x_lo, x_hi + 1):
        cx = px(10.0 ** e)
        out.append(f'<line x1="{cx:.2f}" y1="{TOP + ph}" x2="{cx:.2f}" y2="{TOP + ph + 5}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{cx:.2f}" y="{TOP + ph + 18}" text-anchor="middle">'
                   f'{_fmt_power(e)}</text>')
    for e in range(g_lo, g_hi + 1):
        cy = py(10.0 ** e)
        out.append(f'<line x1="{LEFT - 5}" y1="{cy:.2f}" x2="{LEFT}" y2="{cy:.2f}" '
                   f'stroke="black"/>')
        out.append(f'<text x="{LEFT - 8}" y="{cy + 4:.2f}" text-anchor="end">'
                   f'{_fmt_power(e)}</text>')
    out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{HEIGHT - 15}" text-anchor="middle">x</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2:.2f})">P(X &#8805; x)</text>')
    if title:
        out.append(f'<text x="{LEFT + pw / 2:.2f}" y="{TOP - 5}" text-anchor="middle">'
                   f'{escape(title)}</text>')

    out.append('<g class="empirical" fill="black" fill-opacity="0.6">')
    for cx, cy in zip(px(x), py(g)):
        out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="2.5"/>')
    out.append("</g>")

    legend = [("empirical CCDF", "black")]
    g_floor = 10.0 ** g_lo
    for k, (label, ccdf, start, stop) in enumerate(curves):
        color = COLORS[k % len(COLORS)]
        start = max(start, 10.0 ** x_lo)
        stop = min(stop, 10.0 ** x_hi)
        if not start < stop:
            continue
        xs = np.logspace(math.log10(start), math.log10(stop), 200)
        ys = np.asarray(ccdf(xs), dtype=float)
        keep = (ys >= g_floor) & (ys <= 10.0 ** g_hi)
        if keep.sum() < 2:
            continue
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(xs[keep]), py(ys[keep])))
        out.append(f'<polyline class="model" fill="none" stroke="{color}" stroke-width="2" '
                   f'points="{pts}"/>')
        legend.append((label, color))

    # legend in the upper right, where a CCDF never has points
    lx, ly = LEFT + pw - 290, TOP + 15
    for i, (label, color) in enumerate(legend):
        y = ly + 16 * i
        out.append(f'<line x1="{lx}" y1="{y - 4}" x2="{lx + 20}" y2="{y - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 25}" y="{y}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
