"""Event-detected integration of the hybrid system in its original coordinates.

This is the numerical cross-check for the analytic results, so it does not
use the normal form or any of the closed-form return formulas.  Each arc is
stepped with the exact 2x2 matrix exponential (or scipy's RK45).  A crossing
shows up as a sign change of ``h_rho`` between samples and is then located
by bisection.  After a jump the next side is picked from the direction of
the field at the jump image.
"""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import RK45

from .model import (
    Branch,
    HybridSystemSpec,
    Point,
    Side,
    SigmaPoint,
    SwitchingLine,
    jump_apply,
    jump_invert,
)
from .spectral import Kind, classify

log = logging.getLogger(__name__)


class Termination(enum.Enum):
    CONVERGED = "Converged"
    DIVERGED = "Diverged"
    MAX_TIME = "MaxTime"
    MAX_JUMPS = "MaxJumps"
    REACHED_ORIGIN = "ReachedOrigin"


class SimulationDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    t_max: float = 1000.0
    max_jumps: int = 10_000
    converge_norm: float = 1e-8
    diverge_norm: float = 1e9
    event_tol: float = 1e-12
    integrator: str = "closed_form"  # or "rk45"
    rk_rtol: float = 1e-12
    rk_atol: float = 1e-14  # scaled by the norm of each arc's start point
    step_angle: float = 0.1  # step length times the spectral norm of the field

    def __post_init__(self):
        positive = ("t_max", "converge_norm", "diverge_norm", "event_tol", "rk_rtol", "rk_atol", "step_angle")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"SimConfig.{name} must be > 0")
        if self.max_jumps < 0:
            raise ValueError("SimConfig.max_jumps must be >= 0")
        if self.integrator not in ("closed_form", "rk45"):
            raise ValueError(f"unknown integrator {self.integrator!r}")


# single-arc maps must not stop on absolute size thresholds
_UNBOUNDED = dict(converge_norm=1e-300, diverge_norm=1e300)


@dataclass(frozen=True)
class Arc:
    side: Side
    t: np.ndarray
    points: np.ndarray  # shape (n, 2)


@dataclass(frozen=True)
class Event:
    t: float
    hit: SigmaPoint
    hit_point: Point
    image: SigmaPoint


@dataclass(frozen=True)
class Trajectory:
    arcs: tuple
    events: tuple
    termination: Termination

    @property
    def final_point(self) -> Point:
        if self.arcs:
            x, y = self.arcs[-1].points[-1]
            return (float(x), float(y))
        raise ValueError("empty trajectory")

    @property
    def final_time(self) -> float:
        return float(self.arcs[-1].t[-1]) if self.arcs else 0.0


class LinearFlow:
    """Exact flow ``exp(t M) p`` of a constant 2x2 matrix via Cayley-Hamilton."""

    def __init__(self, m: Sequence[float]):
        a, b, c, d = (float(v) for v in m)
        self.m = (a, b, c, d)
        self.half = 0.5 * (a + d)
        self.disc = 0.25 * (a - d) ** 2 + b * c
        self.n = (a - self.half, b, c, d - self.half)
        self.norm = float(np.linalg.norm(np.array([[a, b], [c, d]]), 2))

    def _coeffs(self, t: float):
        e = math.exp(self.half * t)
        if self.disc > 0:
            nu = math.sqrt(self.disc)
            return e * math.cosh(nu * t), e * math.sinh(nu * t) / nu
        if self.disc < 0:
            w = math.sqrt(-self.disc)
            return e * math.cos(w * t), e * math.sin(w * t) / w
        return e, e * t

    def matrix(self, t: float):
        f0, f1 = self._coeffs(t)
        n11, n12, n21, n22 = self.n
        return (f0 + f1 * n11, f1 * n12, f1 * n21, f0 + f1 * n22)

    def apply(self, t: float, p: Point) -> Point:
        e11, e12, e21, e22 = self.matrix(t)
        return (e11 * p[0] + e12 * p[1], e21 * p[0] + e22 * p[1])


@dataclass
class _ArcOutcome:
    status: str  # "hit", or a Termination value
    t: list = field(default_factory=list)
    pts: list = field(default_factory=list)
    hit_point: Point | None = None
    t_hit: float | None = None


def _bisect(eval_at, t_lo: float, t_hi: float, line: SwitchingLine, sign: int, tol: float):
    """Shrink [t_lo, t_hi] around the zero of h_rho; ``sign`` is h's sign at t_lo."""
    best = None
    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        if mid <= t_lo or mid >= t_hi:
            break
        q = eval_at(mid)
        hq = line.h(q)
        if best is None or abs(hq) < abs(best[2]):
            best = (mid, q, hq)
        if abs(hq) <= tol * math.hypot(*q):
            return mid, q
        if hq * sign > 0:
            t_lo = mid
        else:
            t_hi = mid
    for t in (t_lo, t_hi):
        q = eval_at(t)
        hq = line.h(q)
        if best is None or abs(hq) < abs(best[2]):
            best = (t, q, hq)
    return best[0], best[1]


def _step_size(norm: float, cfg: SimConfig) -> float:
    return cfg.step_angle / max(norm, 1e-300)


def _arc_closed_form(p0: Point, m, sign: int, line: SwitchingLine, t0: float, cfg: SimConfig) -> _ArcOutcome:
    flow = LinearFlow(m)
    dt = _step_size(flow.norm, cfg)
    e11, e12, e21, e22 = flow.matrix(dt)
    out = _ArcOutcome("running", [t0], [p0])
    p, t = p0, t0
    while True:
        if t >= cfg.t_max:
            out.status = Termination.MAX_TIME
            return out
        step = dt if t + dt <= cfg.t_max else cfg.t_max - t
        if step == dt:
            q = (e11 * p[0] + e12 * p[1], e21 * p[0] + e22 * p[1])
        else:
            q = flow.apply(step, p)
        if line.h(q) * sign <= 0:
            base, base_t = p, t
            if line.h(base) * sign <= 0:
                # arc started on the line and left it within one step: find an interior sample
                lo = step
                while line.h(flow.apply(lo, base)) * sign <= 0 and lo > 1e-300:
                    lo *= 0.5
                base, base_t, step = flow.apply(lo, base), t + lo, step - lo
            tau, hit = _bisect(lambda s: flow.apply(s, base), 0.0, step, line, sign, cfg.event_tol)
            out.t.append(base_t + tau)
            out.pts.append(hit)
            out.status, out.hit_point, out.t_hit = "hit", hit, base_t + tau
            return out
        t += step
        p = q
        out.t.append(t)
        out.pts.append(q)
        n = math.hypot(*q)
        if n < cfg.converge_norm:
            out.status = Termination.CONVERGED
            return out
        if n > cfg.diverge_norm:
            out.status = Termination.DIVERGED
            return out


def _arc_rk45(p0: Point, m, sign: int, line: SwitchingLine, t0: float, cfg: SimConfig) -> _ArcOutcome:
    mat = np.array([[m[0], m[1]], [m[2], m[3]]])
    dt = _step_size(float(np.linalg.norm(mat, 2)), cfg)
    out = _ArcOutcome("running", [t0], [p0])
    if t0 >= cfg.t_max:
        out.status = Termination.MAX_TIME
        return out
    atol = cfg.rk_atol * max(math.hypot(*p0), 1e-300)
    solver = RK45(lambda _t, y: mat @ y, t0, np.array(p0, dtype=float), cfg.t_max,
                  max_step=dt, rtol=cfg.rk_rtol, atol=atol)
    while True:
        if solver.status != "running":
            out.status = Termination.MAX_TIME
            return out
        t_old, p_old = solver.t, (float(solver.y[0]), float(solver.y[1]))
        msg = solver.step()
        if solver.status == "failed":
            raise RuntimeError(f"RK45 failed: {msg}")
        q = (float(solver.y[0]), float(solver.y[1]))
        if line.h(q) * sign <= 0:
            dense = solver.dense_output()
            lo = t_old
            if line.h(p_old) * sign <= 0:
                span = solver.t - t_old
                while line.h(tuple(dense(lo + span))) * sign <= 0 and span > 1e-300:
                    span *= 0.5
                lo = t_old + span
            t_hit, hit = _bisect(lambda s: (float(dense(s)[0]), float(dense(s)[1])),
                                 lo, solver.t, line, sign, cfg.event_tol)
            out.t.append(t_hit)
            out.pts.append(hit)
            out.status, out.hit_point, out.t_hit = "hit", hit, t_hit
            return out
        out.t.append(solver.t)
        out.pts.append(q)
        n = math.hypot(*q)
        if n < cfg.converge_norm:
            out.status = Termination.CONVERGED
            return out
        if n > cfg.diverge_norm:
            out.status = Termination.DIVERGED
            return out


def _integrate_arc(p0: Point, m, sign: int, line: SwitchingLine, t0: float, cfg: SimConfig) -> _ArcOutcome:
    if cfg.integrator == "rk45":
        return _arc_rk45(p0, m, sign, line, t0, cfg)
    return _arc_closed_form(p0, m, sign, line, t0, cfg)


def _entries(spec: HybridSystemSpec, side: Side, reverse: bool = False):
    m = spec.matrix(side).m
    vals = (m.b11, m.b12, m.b21, m.b22)
    return tuple(-v for v in vals) if reverse else vals


def _sigma_point(hit: Point) -> SigmaPoint:
    return SigmaPoint.at(hit[0])


def _make_arc(side: Side, outcome: _ArcOutcome) -> Arc:
    return Arc(side, np.asarray(outcome.t, dtype=float), np.asarray(outcome.pts, dtype=float).reshape(-1, 2))


@dataclass(frozen=True)
class SigmaHit:
    hit: SigmaPoint
    t_hit: float
    point: Point


def step_to_sigma(p: Point, side: Side, spec: HybridSystemSpec, cfg: SimConfig | None = None) -> SigmaHit | None:
    """First forward meeting of the switching line from ``p`` under the ``side`` field.

    Returns ``None`` when the orbit converges or runs out of time first.
    """
    cfg = cfg or SimConfig()
    if math.hypot(*p) < cfg.converge_norm:
        return None
    out = _integrate_arc(p, _entries(spec, side), int(side), spec.line, 0.0, cfg)
    if out.status == Termination.DIVERGED:
        raise SimulationDiverged(f"orbit from {p} left norm {cfg.diverge_norm:g}")
    if out.status != "hit":
        return None
    return SigmaHit(_sigma_point(out.hit_point), out.t_hit, out.hit_point)


def run(q0: Point, spec: HybridSystemSpec, cfg: SimConfig | None = None) -> Trajectory:
    """Integrate the hybrid orbit of ``q0`` until a termination condition.

    A start point on the switching line is not jumped; the orbit leaves it
    along the field direction.
    """
    cfg = cfg or SimConfig()
    line = spec.line
    p = (float(q0[0]), float(q0[1]))
    if not all(math.isfinite(v) for v in p):
        raise ValueError(f"start point must be finite, got {q0}")
    arcs, events = [], []

    def done(status):
        return Trajectory(tuple(arcs), tuple(events), status)

    t = 0.0
    if math.hypot(*p) < cfg.converge_norm:
        arcs.append(Arc(Side.PLUS, np.array([0.0]), np.array([p])))
        return done(Termination.CONVERGED)
    side = line.side_of(p) or spec.outgoing_side(p)
    while True:
        out = _integrate_arc(p, _entries(spec, side), int(side), line, t, cfg)
        arcs.append(_make_arc(side, out))
        if out.status != "hit":
            return done(out.status)
        hit = _sigma_point(out.hit_point)
        if abs(hit.coordinate) < cfg.event_tol * math.hypot(*p):
            return done(Termination.REACHED_ORIGIN)
        if len(events) >= cfg.max_jumps:
            return done(Termination.MAX_JUMPS)
        image = jump_apply(hit, spec.jump, line)
        events.append(Event(out.t_hit, hit, out.hit_point, image))
        t = out.t_hit
        p = image.point(line)
        if len(events) >= cfg.max_jumps:
            arcs.append(Arc(spec.outgoing_side(p), np.array([t]), np.array([p])))
            return done(Termination.MAX_JUMPS)
        n = math.hypot(*p)
        if n < cfg.converge_norm:
            arcs.append(Arc(side, np.array([t]), np.array([p])))
            return done(Termination.CONVERGED)
        if n > cfg.diverge_norm:
            arcs.append(Arc(side, np.array([t]), np.array([p])))
            return done(Termination.DIVERGED)
        side = spec.outgoing_side(p)


def _require_foci(spec: HybridSystemSpec) -> None:
    for side in Side:
        B = spec.matrix(side)
        if classify(B.trace, B.neg_det).kind is not Kind.F:
            raise ValueError(f"{side.symbol} side is not a focus")


def _single_cfg(cfg: SimConfig | None) -> SimConfig:
    base = cfg or SimConfig()
    return SimConfig(t_max=base.t_max, max_jumps=base.max_jumps, event_tol=base.event_tol,
                     integrator=base.integrator, rk_rtol=base.rk_rtol, rk_atol=base.rk_atol,
                     step_angle=base.step_angle, **_UNBOUNDED)


def _left_hit(start: Point, m, sign: int, line: SwitchingLine, cfg: SimConfig) -> float:
    out = _integrate_arc(start, m, sign, line, 0.0, cfg)
    if out.status != "hit":
        raise SimulationDiverged(f"no switching-line hit from {start}: {out.status}")
    hit = _sigma_point(out.hit_point)
    if hit.branch is not Branch.LEFT:
        raise ArithmeticError(f"expected a left-ray hit, got {hit}")
    return hit.coordinate


def empirical_half_returns(x: float, spec: HybridSystemSpec, cfg: SimConfig | None = None) -> tuple:
    """Simulated ``(backward, forward)`` left-ray coordinates for right-ray coordinate ``x``.

    Forward: leave (x, rho x) along the flow, reach the left ray, jump.
    Backward: undo the right-ray jump, then follow the other side's field
    in reversed time to the left ray.
    """
    _require_foci(spec)
    cfg = _single_cfg(cfg)
    line = spec.line
    start = line.embed(x)
    side = spec.outgoing_side(start)
    fwd_hit = _left_hit(start, _entries(spec, side), int(side), line, cfg)
    forward = jump_apply(SigmaPoint(Branch.LEFT, fwd_hit), spec.jump).coordinate

    pre = jump_invert(SigmaPoint(Branch.RIGHT, x), spec.jump).point(line)
    back_side = Side(-int(spec.outgoing_side(pre)))
    backward = _left_hit(pre, _entries(spec, back_side, reverse=True), int(back_side), line, cfg)
    return backward, forward


def empirical_displacement(x: float, spec: HybridSystemSpec, cfg: SimConfig | None = None) -> float:
    backward, forward = empirical_half_returns(x, spec, cfg)
    return backward - forward


def empirical_return_map(x: float, spec: HybridSystemSpec, cfg: SimConfig | None = None) -> float:
    """Right-ray coordinate after one full hybrid turn (two jumps) from (x, rho x)."""
    if not x > 0:
        raise ValueError(f"x must be > 0, got {x!r}")
    _require_foci(spec)
    base = _single_cfg(cfg)
    one_turn = SimConfig(t_max=base.t_max, max_jumps=2, event_tol=base.event_tol,
                         integrator=base.integrator, rk_rtol=base.rk_rtol, rk_atol=base.rk_atol,
                         step_angle=base.step_angle, **_UNBOUNDED)
    traj = run(spec.line.embed(x), spec, one_turn)
    if len(traj.events) < 2:
        if traj.termination is Termination.DIVERGED:
            raise SimulationDiverged(f"orbit from x={x!r} diverged")
        raise RuntimeError(f"orbit from x={x!r} ended with {traj.termination.value} before returning")
    image = traj.events[1].image
    if image.branch is not Branch.RIGHT:
        raise ArithmeticError(f"second jump landed on {image.branch.value}, expected the right ray")
    return image.coordinate


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["arc_index", "side", "t", "x", "y"])
        for i, arc in enumerate(traj.arcs):
            for t, (x, y) in zip(arc.t, arc.points):
                w.writerow([i, arc.side.symbol, repr(float(t)), repr(float(x)), repr(float(y))])


def write_events_csv(traj: Trajectory, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["event_index", "t", "hit_x", "hit_branch", "jump_x"])
        for i, ev in enumerate(traj.events):
            w.writerow([i, repr(ev.t), repr(ev.hit.coordinate), ev.hit.branch.value, repr(ev.image.coordinate)])
