"""Self-contained SVG phase portraits."""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from typing import Iterable, Sequence

import numpy as np

from .analysis import Case, StabilityVerdict
from .model import HybridSystemSpec, Point, Side, SwitchingLine
from .simulate import SimConfig, Trajectory, run

SIZE = 640
MARGIN = 24
MAX_POINTS_PER_ARC = 400

STYLE = """
.frame { fill: #ffffff; stroke: #cccccc; }
.axis { stroke: #e0e0e0; stroke-width: 1; }
.sigma { fill: none; stroke: #000000; stroke-width: 2; }
.arc-plus { fill: none; stroke: #c0392b; stroke-width: 1.2; }
.arc-minus { fill: none; stroke: #2c6fbb; stroke-width: 1.2; }
.jump-link { stroke: #7f7f7f; stroke-width: 1; stroke-dasharray: 4 3; }
.jump-hit { fill: #ffffff; stroke: #333333; stroke-width: 1; }
.jump-image { fill: #333333; }
.limit-cycle { fill: none; stroke: #f39c12; stroke-width: 3.5; stroke-opacity: 0.85; }
.origin { fill: #000000; }
.label { font-family: sans-serif; font-size: 14px; fill: #222222; }
"""


class _Canvas:
    def __init__(self, window: float):
        self.window = window
        self.scale = (SIZE - 2 * MARGIN) / (2 * window)

    def xy(self, p: Sequence[float]) -> tuple:
        return (SIZE / 2 + p[0] * self.scale, SIZE / 2 - p[1] * self.scale)

    def fmt(self, pts: Iterable[Sequence[float]]) -> str:
        return " ".join("%.2f,%.2f" % self.xy(p) for p in pts)


def _thin(points: np.ndarray) -> np.ndarray:
    if len(points) <= MAX_POINTS_PER_ARC:
        return points
    idx = np.linspace(0, len(points) - 1, MAX_POINTS_PER_ARC).round().astype(int)
    return points[idx]


def _sigma_polyline(spec: HybridSystemSpec, window: float) -> list:
    rho = spec.rho
    end = (window, rho * window) if rho <= 1 else (window / rho, window)
    return [(-window, 0.0), (0.0, 0.0), end]


def _draw_trajectory(parent, canvas: _Canvas, traj: Trajectory, line: SwitchingLine) -> None:
    for arc in traj.arcs:
        if len(arc.points) < 2:
            continue
        cls = "arc-plus" if arc.side is Side.PLUS else "arc-minus"
        ET.SubElement(parent, "polyline", {"class": cls, "points": canvas.fmt(_thin(arc.points))})
    for ev in traj.events:
        hx, hy = canvas.xy(ev.hit_point)
        ix, iy = canvas.xy(ev.image.point(line))
        ET.SubElement(parent, "line", {"class": "jump-link", "x1": "%.2f" % hx, "y1": "%.2f" % hy,
                                       "x2": "%.2f" % ix, "y2": "%.2f" % iy})
        ET.SubElement(parent, "circle", {"class": "jump-hit", "cx": "%.2f" % hx, "cy": "%.2f" % hy, "r": "3"})
        ET.SubElement(parent, "circle", {"class": "jump-image", "cx": "%.2f" % ix, "cy": "%.2f" % iy, "r": "2.5"})


def _cycle_path(canvas: _Canvas, traj: Trajectory) -> str:
    """One closed path through the cycle arcs; jumps are straight connectors."""
    parts = []
    for arc in traj.arcs:
        pts = _thin(arc.points)
        if len(pts) == 0:
            continue
        cmd = "M" if not parts else "L"
        parts.append(cmd + " " + " L ".join("%.2f %.2f" % canvas.xy(p) for p in pts))
    return " ".join(parts) + " Z"


def render_portrait(spec: HybridSystemSpec, verdict: StabilityVerdict | None, seeds: Sequence[Point],
                    window: float | None = None, cfg: SimConfig | None = None) -> str:
    cfg = cfg or SimConfig(t_max=200.0, max_jumps=60)
    cycle_traj = None
    if verdict is not None and verdict.case is Case.LIMIT_CYCLE:
        start = spec.line.embed(verdict.cycle.x0)
        cycle_cfg = SimConfig(t_max=cfg.t_max, max_jumps=2, converge_norm=1e-300, diverge_norm=1e300)
        cycle_traj = run(start, spec, cycle_cfg)
    if window is None:
        extent = [math.hypot(*s) for s in seeds]
        if cycle_traj is not None:
            extent.append(float(np.max(np.abs(np.concatenate([a.points for a in cycle_traj.arcs])))))
        window = 1.25 * max(extent) if extent else 2.0
    canvas = _Canvas(window)
    orbit_cfg = SimConfig(t_max=cfg.t_max, max_jumps=cfg.max_jumps, converge_norm=window * 1e-4,
                          diverge_norm=window * 50, event_tol=cfg.event_tol, integrator=cfg.integrator)

    svg = ET.Element("svg", {"xmlns": "http://www.w3.org/2000/svg", "width": str(SIZE), "height": str(SIZE),
                             "viewBox": f"0 0 {SIZE} {SIZE}"})
    ET.SubElement(svg, "style").text = STYLE
    defs = ET.SubElement(svg, "defs")
    clip = ET.SubElement(defs, "clipPath", {"id": "plot"})
    ET.SubElement(clip, "rect", {"x": str(MARGIN), "y": str(MARGIN), "width": str(SIZE - 2 * MARGIN),
                                 "height": str(SIZE - 2 * MARGIN)})
    ET.SubElement(svg, "rect", {"class": "frame", "x": str(MARGIN), "y": str(MARGIN),
                                "width": str(SIZE - 2 * MARGIN), "height": str(SIZE - 2 * MARGIN)})
    plot = ET.SubElement(svg, "g", {"clip-path": "url(#plot)"})
    ET.SubElement(plot, "polyline", {"class": "axis", "points": canvas.fmt([(0, -window), (0, window)])})
    ET.SubElement(plot, "polyline", {"class": "sigma", "points": canvas.fmt(_sigma_polyline(spec, window))})

    orbits = ET.SubElement(plot, "g", {"id": "orbits"})
    for seed in seeds:
        traj = run(seed, spec, orbit_cfg)
        g = ET.SubElement(orbits, "g", {"class": "orbit", "data-termination": traj.termination.value})
        _draw_trajectory(g, canvas, traj, spec.line)

    if cycle_traj is not None:
        ET.SubElement(plot, "path", {"class": "limit-cycle", "d": _cycle_path(canvas, cycle_traj),
                                     "data-x0": repr(verdict.cycle.x0)})
    ox, oy = canvas.xy((0.0, 0.0))
    ET.SubElement(plot, "circle", {"class": "origin", "cx": "%.2f" % ox, "cy": "%.2f" % oy, "r": "3.5"})

    label = "verdict: " + (verdict.case.value if verdict is not None else "n/a")
    if verdict is not None and verdict.cycle is not None:
        label += f" (x0 = {verdict.cycle.x0:.6g}, {verdict.cycle.stability})"
    label += f"   rho = {spec.rho:g}"
    text = ET.SubElement(svg, "text", {"class": "label", "x": str(MARGIN + 6), "y": str(MARGIN + 18)})
    text.text = label
    return ET.tostring(svg, encoding="unicode")
