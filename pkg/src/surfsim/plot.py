"""Minimal SVG rendering of sweep results (no plotting dependency)."""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .experiment import SweepPoint
from .fit import FitResult

W, H = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 20, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def render_svg(points: list[SweepPoint], fit: FitResult | None = None, title: str = "") -> str:
    """p_l against p, one polyline per distance, with +-2 sigma error bars.

    A fit, when given, adds its scaling curves (dashed) and a vertical
    marker at the fitted threshold.
    """
    if not points:
        raise ValueError("nothing to plot: no sweep points")
    ps = np.array([pt.p for pt in points])
    lo = np.array([pt.p_l - 2 * pt.stderr for pt in points])
    hi = np.array([pt.p_l + 2 * pt.stderr for pt in points])
    x0, x1 = float(ps.min()), float(ps.max())
    if x1 == x0:
        x0, x1 = x0 * 0.9, x1 * 1.1 + 1e-9
    y0, y1 = max(0.0, float(lo.min())), float(hi.max())
    if y1 <= y0:
        y1 = y0 + 1e-9
    pad = 0.05 * (y1 - y0)
    y0, y1 = max(0.0, y0 - pad), y1 + pad

    def sx(p):
        return LEFT + (p - x0) / (x1 - x0) * (W - LEFT - RIGHT)

    def sy(v):
        return H - BOTTOM - (v - y0) / (y1 - y0) * (H - TOP - BOTTOM)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<line class="axis" x1="{LEFT}" y1="{H - BOTTOM}" x2="{W - RIGHT}" y2="{H - BOTTOM}" stroke="black"/>',
        f'<line class="axis" x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{H - BOTTOM}" stroke="black"/>',
    ]
    for k in range(5):
        p = x0 + k * (x1 - x0) / 4
        v = y0 + k * (y1 - y0) / 4
        out.append(f'<text x="{sx(p):.1f}" y="{H - BOTTOM + 18}" font-size="11" text-anchor="middle">{p:.4g}</text>')
        out.append(f'<text x="{LEFT - 6}" y="{sy(v) + 4:.1f}" font-size="11" text-anchor="end">{v:.3g}</text>')
    out.append(f'<text x="{(LEFT + W - RIGHT) / 2}" y="{H - 12}" font-size="13" text-anchor="middle">physical error rate p</text>')
    out.append(f'<text x="16" y="{(TOP + H - BOTTOM) / 2}" font-size="13" text-anchor="middle" '
               f'transform="rotate(-90 16 {(TOP + H - BOTTOM) / 2})">logical error rate</text>')
    if title:
        out.append(f'<text x="{W / 2}" y="{TOP + 4}" font-size="13" text-anchor="middle">{escape(title)}</text>')

    for i, d in enumerate(sorted({pt.d for pt in points})):
        color = COLORS[i % len(COLORS)]
        sel = sorted((pt for pt in points if pt.d == d), key=lambda pt: pt.p)
        coords = " ".join(f"{sx(pt.p):.2f},{sy(pt.p_l):.2f}" for pt in sel)
        out.append(f'<polyline class="curve" data-d="{d}" points="{coords}" fill="none" stroke="{color}"/>')
        for pt in sel:
            x = sx(pt.p)
            out.append(f'<line class="errbar" x1="{x:.2f}" y1="{sy(max(y0, pt.p_l - 2 * pt.stderr)):.2f}" '
                       f'x2="{x:.2f}" y2="{sy(pt.p_l + 2 * pt.stderr):.2f}" stroke="{color}"/>')
            out.append(f'<circle cx="{x:.2f}" cy="{sy(pt.p_l):.2f}" r="2.5" fill="{color}"/>')
        out.append(f'<text x="{W - RIGHT - 60}" y="{TOP + 16 + 15 * i}" font-size="12" fill="{color}">d = {d}</text>')
        if fit is not None:
            grid = np.linspace(x0, x1, 60)
            model = fit.predict(grid, d)
            keep = (model >= y0) & (model <= y1)
            pts = " ".join(f"{sx(p):.2f},{sy(v):.2f}" for p, v in zip(grid[keep], model[keep]))
            if pts:
                out.append(f'<polyline class="fit" data-d="{d}" points="{pts}" fill="none" '
                           f'stroke="{color}" stroke-dasharray="4 3"/>')
    if fit is not None and x0 <= fit.p_th <= x1:
        x = sx(fit.p_th)
        out.append(f'<line class="pth" x1="{x:.2f}" y1="{TOP}" x2="{x:.2f}" y2="{H - BOTTOM}" stroke="gray" stroke-dasharray="2 2"/>')
        out.append(f'<text x="{x + 4:.2f}" y="{TOP + 12}" font-size="11" fill="gray">p_th = {fit.p_th:.5f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
