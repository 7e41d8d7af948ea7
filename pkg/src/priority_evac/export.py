"""Trajectory CSV and SVG renderings of an algorithm and its worst exits."""

from __future__ import annotations

import numpy as np

from .cost import EvacuationReport, robot_name
from .geometry import unit_point
from .trajectory import export_csv_rows

CANVAS = 800
RADIUS = 350
MARKER_TOL = 1e-4  # exits this close to the worst case get a marker
SAME_TIME = 1e-6
N_POLY = 2001
COLORS = ("#d62728", "#1f77b4", "#9467bd", "#ff7f0e")


def _xy(x: float, y: float) -> tuple[str, str]:
    c = CANVAS / 2
    return f"{c + RADIUS * x:.2f}", f"{c - RADIUS * y:.2f}"


def _px(x: float, y: float) -> str:
    return ",".join(_xy(x, y))


def worst_exits(report: EvacuationReport, tol: float = MARKER_TOL) -> list:
    """Near-worst maxima, one per discovery time.

    Mirror-image servants find symmetric exits at the same instant; only
    the lowest-indexed finder is kept.
    """
    out = []
    for m in sorted(report.near_maximizers(tol), key=lambda m: (m.discovery_time, m.finder)):
        if out and abs(m.discovery_time - out[-1].discovery_time) <= SAME_TIME:
            if m.finder < out[-1].finder:
                out[-1] = m
            continue
        out.append(m)
    return out


def csv_text(instance, dt: float = 1e-3) -> str:
    trajs = instance.trajectories
    names = [robot_name(i) for i in range(len(trajs))]
    return "\n".join(export_csv_rows(trajs, names, instance.search_time, dt)) + "\n"


def svg_text(instance, report: EvacuationReport, marker_tol: float = MARKER_TOL) -> str:
    c = CANVAS / 2
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">',
        f'<rect width="{CANVAS}" height="{CANVAS}" fill="white"/>',
        f'<circle cx="{c:.2f}" cy="{c:.2f}" r="{RADIUS:.2f}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    ts = np.linspace(0.0, instance.search_time, N_POLY)
    for i, tr in enumerate(instance.trajectories):
        pts = " ".join(_px(x, y) for x, y in tr.positions(ts))
        lines.append(
            f'<polyline id="{robot_name(i)}" points="{pts}" fill="none" stroke="{COLORS[i % len(COLORS)]}" stroke-width="2"/>'
        )
    for m in worst_exits(report, marker_tol):
        e = unit_point(m.exit_angle)
        qx, qy = _xy(m.pickup.x, m.pickup.y)
        ex, ey = _xy(e.x, e.y)
        lines.append(
            f'<line class="pickup" x1="{qx}" y1="{qy}" x2="{ex}" y2="{ey}"'
            ' stroke="green" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
        lines.append(f'<circle class="worst-exit" cx="{ex}" cy="{ey}" r="6" fill="black"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
