"""Minimal deterministic SVG line charts.

A convenience view on the CSV artifacts, not a plotting library: fixed
canvas, one polyline per series, linear or log-10 y axis, small legend.
"""

from __future__ import annotations

import math
from typing import Sequence

WIDTH, HEIGHT = 640, 420
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 62, 16, 34, 46
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def line_chart(
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
    title: str,
    xlabel: str,
    ylabel: str,
    log_y: bool = False,
) -> str:
    """Render ``(label, xs, ys)`` series to an SVG document string."""
    pts = []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if log_y and y <= 0.0:
                continue
            pts.append((float(x), math.log10(y) if log_y else float(y)))
    if not pts:
        pts = [(0.0, 0.0), (1.0, 1.0)]
    x_lo = min(p[0] for p in pts)
    x_hi = max(p[0] for p in pts)
    y_lo = min(p[1] for p in pts)
    y_hi = max(p[1] for p in pts)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def px(x: float) -> float:
        return MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
    ]
    for xt in _ticks(x_lo, x_hi):
        xp = px(xt)
        out.append(
            f'<line x1="{xp:.2f}" y1="{MARGIN_T}" x2="{xp:.2f}" '
            f'y2="{HEIGHT - MARGIN_B}" stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{xp:.2f}" y="{HEIGHT - MARGIN_B + 16}" '
            f'text-anchor="middle">{_fmt(xt)}</text>'
        )
    for yt in _ticks(y_lo, y_hi):
        yp = py(yt)
        label = f"1e{_fmt(yt)}" if log_y else _fmt(yt)
        out.append(
            f'<line x1="{MARGIN_L}" y1="{yp:.2f}" x2="{WIDTH - MARGIN_R}" '
            f'y2="{yp:.2f}" stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{MARGIN_L - 6}" y="{yp + 4:.2f}" text-anchor="end">{label}</text>'
        )
    out.append(
        f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#444444"/>'
    )
    for idx, (label, xs, ys) in enumerate(series):
        color = PALETTE[idx % len(PALETTE)]
        coords = []
        for x, y in zip(xs, ys):
            if log_y:
                if y <= 0.0:
                    continue
                y = math.log10(y)
            coords.append(f"{px(float(x)):.2f},{py(float(y)):.2f}")
        if coords:
            out.append(
                f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                f'points="{" ".join(coords)}"/>'
            )
        ly = MARGIN_T + 14 + 16 * idx
        lx = WIDTH - MARGIN_R - 150
        out.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(f'<text x="{lx + 28}" y="{ly}">{label}</text>')
    out.append(
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" text-anchor="middle">{xlabel}</text>'
    )
    out.append(
        f'<text x="16" y="{HEIGHT / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {HEIGHT / 2:.1f})">{ylabel}</text>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
