"""Flow-portrait rendering: boundary curves, critical glyphs, orbit polylines.

Write-only SVG 1.1 with a fixed 800x800 viewport; figures are inspection aids.
"""
from __future__ import annotations

import numpy as np

from .critical import BOUNDARY_D, BOUNDARY_N, boundary_components
from .geometry import QuotientChart, RegionChart

VIEW = 800.0
MARGIN = 40.0


def _world_box(chart):
    if isinstance(chart, QuotientChart):
        return (0.0, chart.period), (chart.v_min, chart.v_max)
    return chart.box


class _Mapper:
    def __init__(self, chart):
        (x0, x1), (y0, y1) = _world_box(chart) if chart.dim == 2 else (chart.box[0], (0, 1))
        span = max(x1 - x0, y1 - y0)
        self.scale = (VIEW - 2 * MARGIN) / span
        self.x0, self.y0 = x0, y0
        self.y1 = y1

    def pt(self, xy) -> tuple[float, float]:
        sx = MARGIN + (float(xy[0]) - self.x0) * self.scale
        sy = MARGIN + (self.y1 - float(xy[1])) * self.scale
        return round(sx, 2), round(sy, 2)


def _color(value: float, lo: float, hi: float) -> str:
    """Value-graded color from cold (low) to warm (high)."""
    if hi <= lo:
        t = 0.5
    else:
        t = (value - lo) / (hi - lo)
    r = int(40 + 200 * t)
    b = int(240 - 200 * t)
    return f"rgb({r},60,{b})"


def _split_segments(chart, points: np.ndarray) -> list[np.ndarray]:
    """Canonicalize a polyline and break it where it crosses the gluing seam."""
    if isinstance(chart, RegionChart):
        return [points]
    canon = points.copy()
    flips = np.floor(canon[:, 0] / chart.period)
    canon[:, 0] -= flips * chart.period
    canon[:, 1] *= np.where(flips.astype(int) % 2 == 0, 1.0, float(chart.flip))
    pieces = []
    start = 0
    for i in range(1, len(canon)):
        if abs(canon[i, 0] - canon[i - 1, 0]) > 0.5 * chart.period:
            pieces.append(canon[start:i])
            start = i
    pieces.append(canon[start:])
    return [p for p in pieces if len(p) >= 2]


def render(entry, package, path: str) -> None:
    """Write the flow portrait of a two-dimensional analysis to an SVG file."""
    chart = entry.chart
    if chart.dim != 2:
        raise ValueError("portraits are only drawn for two-dimensional entries")
    mapper = _Mapper(chart)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{int(VIEW)}" height="{int(VIEW)}" '
        f'viewBox="0 0 {int(VIEW)} {int(VIEW)}">',
        f'<rect width="{int(VIEW)}" height="{int(VIEW)}" fill="white"/>',
    ]

    for loop in boundary_components(chart, 600):
        pieces = _split_segments(chart, np.array(loop))
        for piece in pieces:
            coords = " ".join(f"{x},{y}" for x, y in (mapper.pt(p) for p in piece))
            parts.append(f'<polyline points="{coords}" fill="none" '
                         f'stroke="black" stroke-width="2"/>')
    if isinstance(chart, QuotientChart):
        a = mapper.pt((0.0, chart.v_min))
        b = mapper.pt((0.0, chart.v_max))
        c = mapper.pt((chart.period, chart.v_min))
        d = mapper.pt((chart.period, chart.v_max))
        for p, q in ((a, b), (c, d)):
            parts.append(f'<line x1="{p[0]}" y1="{p[1]}" x2="{q[0]}" y2="{q[1]}" '
                         f'stroke="gray" stroke-width="1" stroke-dasharray="6,4"/>')

    values = [cp.value for cp in package.crit.points]
    lo, hi = min(values), max(values)
    for side, style in (("N", "none"), ("D", "4,3")):
        for inc in package.incidences[side].values():
            for orbit in inc.orbits:
                for piece in _split_segments(chart, orbit.trajectory.points):
                    step = max(1, len(piece) // 300)
                    pts = piece[::step]
                    coords = " ".join(f"{x},{y}" for x, y in (mapper.pt(p) for p in pts))
                    color = _color(orbit.trajectory.values[0], lo, hi)
                    dash = "" if style == "none" else f' stroke-dasharray="{style}"'
                    parts.append(f'<polyline points="{coords}" fill="none" '
                                 f'stroke="{color}" stroke-width="1.5"{dash}/>')
                mid = orbit.trajectory.points[len(orbit.trajectory.points) // 2]
                mx, my = mapper.pt(_split_segments(chart, np.array([mid, mid]))[0][0]
                                   if isinstance(chart, QuotientChart) else mid)
                label = "+" if orbit.sign > 0 else "−"
                parts.append(f'<text x="{mx + 4}" y="{my - 4}" font-size="16" '
                             f'fill="black">{label}</text>')

    for cp in package.crit.points:
        x, y = mapper.pt(cp.point.coords)
        if cp.kind == BOUNDARY_N:
            parts.append(f'<circle cx="{x}" cy="{y}" r="7" fill="#1f6f1f" '
                         f'stroke="black"/>')
        elif cp.kind == BOUNDARY_D:
            parts.append(f'<rect x="{x - 6}" y="{y - 6}" width="12" height="12" '
                         f'fill="white" stroke="#8b2020" stroke-width="2"/>')
        else:
            parts.append(f'<polygon points="{x},{y - 8} {x + 8},{y} {x},{y + 8} '
                         f'{x - 8},{y}" fill="#27408b" stroke="black"/>')
        letter = {BOUNDARY_N: "N", BOUNDARY_D: "D"}.get(cp.kind, "C")
        parts.append(f'<text x="{x + 9}" y="{y + 14}" font-size="13" '
                     f'fill="black">{cp.id}:{letter}{cp.grading}</text>')

    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(parts) + "\n")
