"""Minimal deterministic SVG line charts (no plotting dependency)."""

from __future__ import annotations

import math
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

WIDTH, HEIGHT = 900, 600
MARGIN = dict(left=80, right=200, top=40, bottom=60)
PALETTE = (
    "#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79",
)


def _ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / max(n - 1, 1)
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    out = []
    x = start
    while x <= hi + 1e-9 * step:
        out.append(round(x, 12))
        x += step
    return out


def _f(x: float) -> str:
    return f"{x:.2f}"


def line_chart(
    x: Sequence[float],
    series: Mapping[str, Sequence[float | None]],
    title: str = "",
    x_label: str = "t",
    y_label: str = "",
) -> str:
    """Render one polyline per series; ``None`` values break the line."""
    ys = [v for vals in series.values() for v in vals if v is not None and math.isfinite(v)]
    y_lo, y_hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    y_lo = min(y_lo, 0.0)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    x_lo, x_hi = (min(x), max(x)) if len(x) else (0.0, 1.0)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    pw = WIDTH - MARGIN["left"] - MARGIN["right"]
    ph = HEIGHT - MARGIN["top"] - MARGIN["bottom"]

    def px(v):
        return MARGIN["left"] + (v - x_lo) / (x_hi - x_lo) * pw

    def py(v):
        return MARGIN["top"] + (1 - (v - y_lo) / (y_hi - y_lo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.0f}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<rect x="{MARGIN["left"]}" y="{MARGIN["top"]}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
    ]
    for tx in _ticks(x_lo, x_hi):
        out.append(f'<line x1="{_f(px(tx))}" y1="{MARGIN["top"] + ph}" x2="{_f(px(tx))}" y2="{MARGIN["top"] + ph + 5}" stroke="#444"/>')
        out.append(f'<text x="{_f(px(tx))}" y="{MARGIN["top"] + ph + 20}" text-anchor="middle" font-size="12">{tx:g}</text>')
    for ty in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{MARGIN["left"] - 5}" y1="{_f(py(ty))}" x2="{MARGIN["left"]}" y2="{_f(py(ty))}" stroke="#444"/>')
        out.append(f'<text x="{MARGIN["left"] - 8}" y="{_f(py(ty) + 4)}" text-anchor="end" font-size="12">{ty:g}</text>')
    out.append(f'<text x="{MARGIN["left"] + pw / 2:.0f}" y="{HEIGHT - 15}" text-anchor="middle" font-size="14">{escape(x_label)}</text>')
    if y_label:
        out.append(
            f'<text x="20" y="{MARGIN["top"] + ph / 2:.0f}" text-anchor="middle" font-size="14" '
            f'transform="rotate(-90 20 {MARGIN["top"] + ph / 2:.0f})">{escape(y_label)}</text>'
        )
    for k, (name, vals) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        runs, cur = [], []
        for xv, yv in zip(x, vals):
            if yv is None or not math.isfinite(yv):
                if cur:
                    runs.append(cur)
                cur = []
            else:
                cur.append(f"{_f(px(xv))},{_f(py(yv))}")
        if cur:
            runs.append(cur)
        for run in runs:
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{" ".join(run)}"/>')
        ly = MARGIN["top"] + 10 + 20 * k
        lx = WIDTH - MARGIN["right"] + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}" font-size="12">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
