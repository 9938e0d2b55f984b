"""Closed-form flows in companion coordinates and the two half-return maps.

Everything here works in normal-form coordinates, where each side is
``[[sigma, delta], [1, 0]]`` and orbits turn counterclockwise.  The forward
half starts on the right ray, follows the plus field to the left ray and
jumps; the backward half undoes the jump on the right ray and follows the
minus field backward in time to the left ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import Branch, Point, Side, SigmaPoint, SwitchingLine, jump_apply, jump_invert
from .normal_form import NormalFormSystem
from .spectral import Kind, SpectralData, classify

RESIDUAL_TOL = 1e-10
_RTOL = 4 * float(np.finfo(float).eps)


class NotFocusError(ValueError):
    """A half-return map was requested for a node side."""


@dataclass(frozen=True)
class FocusFlowParams:
    lam: float
    mu: float

    def __post_init__(self):
        if not (self.lam < 0 and self.mu > 0):
            raise ValueError(f"need lam < 0 < mu, got ({self.lam!r}, {self.mu!r})")

    @property
    def prod(self) -> float:
        """Product of the eigenvalues, ``lam**2 + mu**2``."""
        return self.lam * self.lam + self.mu * self.mu

    @classmethod
    def from_spectral(cls, data: SpectralData) -> "FocusFlowParams":
        if data.kind is not Kind.F:
            raise NotFocusError(f"side is of type {data.kind.value}, not F")
        return cls(data.lam, data.mu)


def focus_flow(t: float, p: Point, params: FocusFlowParams) -> Point:
    lam, mu = params.lam, params.mu
    x, y = p
    e = math.exp(lam * t)
    c, s = math.cos(mu * t), math.sin(mu * t)
    return (
        e * (x * c + (lam * x - params.prod * y) * s / mu),
        e * (y * c + (x - lam * y) * s / mu),
    )


def node_flow(t: float, p: Point, spec: SpectralData) -> Point:
    """Exact flow of a companion node; eigenvectors are ``(r, 1)``."""
    x, y = p
    if spec.kind is Kind.N1:
        r1, r2 = spec.r1, spec.r2
        # p = c1 (r1, 1) + c2 (r2, 1)
        c1 = (x - r2 * y) / (r1 - r2)
        c2 = (r1 * y - x) / (r1 - r2)
        e1, e2 = c1 * math.exp(r1 * t), c2 * math.exp(r2 * t)
        return (e1 * r1 + e2 * r2, e1 + e2)
    if spec.kind is Kind.N2:
        r = spec.r
        e = math.exp(r * t)
        # (A - rI) p with A = [[2r, -r^2], [1, 0]]
        nx, ny = r * x - r * r * y, x - r * y
        return (e * (x + t * nx), e * (y + t * ny))
    raise ValueError("node_flow needs an N1 or N2 side")


def _hits_left_ray(q: Point) -> bool:
    return abs(q[1]) <= RESIDUAL_TOL * (1.0 + abs(q[0])) and q[0] < 0


def _closed_form_time(rho: float, lam: float, mu: float, side: Side) -> float:
    angle = math.atan(mu * rho / (lam * rho - 1.0))
    return (side * angle + math.pi) / mu


def _orbit(rho: float, params: FocusFlowParams, side: Side):
    """Time-parametrized orbit from (1, rho): forward for plus, backward for minus."""
    sgn = 1.0 if side is Side.PLUS else -1.0
    return lambda t: focus_flow(sgn * t, (1.0, rho), params)


def _first_left_hit(rho: float, params: FocusFlowParams, side: Side, n: int = 4096) -> float:
    """First positive time the orbit from (1, rho) meets the left ray.

    Scans ``y`` on (0, 2*pi/mu] and keeps only sign changes with ``x < 0``;
    a zero of ``y`` with ``x > 0`` is inside the lower half-plane, not on
    the switching line.
    """
    orbit = _orbit(rho, params, side)
    period = 2.0 * math.pi / params.mu
    prev_t, prev = None, None
    for k in range(1, n + 1):
        t = period * k / n
        q = orbit(t)
        if prev is not None and (prev[1] > 0) != (q[1] > 0) and q[0] < 0:
            return brentq(lambda u: orbit(u)[1], prev_t, t, xtol=1e-18 * period, rtol=_RTOL, maxiter=200)
        prev_t, prev = t, q
    raise RuntimeError("no crossing of the left ray within one period")


def _no_earlier_hit(rho: float, params: FocusFlowParams, side: Side, t_hit: float, n: int = 256) -> bool:
    """True when ``h_rho`` keeps one sign on (0, t_hit)."""
    line = SwitchingLine(rho)
    orbit = _orbit(rho, params, side)
    expected = 1.0 if side is Side.PLUS else -1.0
    for k in range(1, n):
        if line.h(orbit(t_hit * k / n)) * expected <= 0:
            return False
    return True


def crossing_time(rho: float, lam: float, mu: float, side: Side) -> float:
    """Time to reach the left ray from the right ray (forward for plus, backward for minus).

    The arctan closed form is verified against the flow and replaced by a
    bracketed root search if it does not land on the left ray first.
    """
    params = FocusFlowParams(lam, mu)
    t = _closed_form_time(rho, lam, mu, side)
    q = _orbit(rho, params, side)(t)
    if t > 0 and _hits_left_ray(q) and _no_earlier_hit(rho, params, side, t):
        return t
    return _first_left_hit(rho, params, side)


@dataclass(frozen=True)
class ReturnCoefficients:
    phi_plus: float
    phi_minus: float
    t_plus: float
    t_minus: float
    plus: FocusFlowParams
    minus: FocusFlowParams

    @property
    def cos_sin_plus(self) -> float:
        """``cos(mu+ t+) + Phi+ sin(mu+ t+)``: left-ray image of (1, rho), up to e^(lam+ t+)."""
        a = self.plus.mu * self.t_plus
        return math.cos(a) + self.phi_plus * math.sin(a)

    @property
    def cos_sin_minus(self) -> float:
        a = self.minus.mu * self.t_minus
        return math.cos(a) - self.phi_minus * math.sin(a)


def focus_params(nf: NormalFormSystem, side: Side) -> FocusFlowParams:
    if side is Side.PLUS:
        data = classify(nf.sigma_plus, nf.delta_plus)
    else:
        data = classify(nf.sigma_minus, nf.delta_minus)
    try:
        return FocusFlowParams.from_spectral(data)
    except NotFocusError as exc:
        raise NotFocusError(f"{side.symbol} side: {exc}") from None


def return_coefficients(nf: NormalFormSystem) -> ReturnCoefficients:
    plus, minus = focus_params(nf, Side.PLUS), focus_params(nf, Side.MINUS)
    rho = nf.rho
    return ReturnCoefficients(
        phi_plus=(plus.lam - plus.prod * rho) / plus.mu,
        phi_minus=(minus.lam - minus.prod * rho) / minus.mu,
        t_plus=crossing_time(rho, plus.lam, plus.mu, Side.PLUS),
        t_minus=crossing_time(rho, minus.lam, minus.mu, Side.MINUS),
        plus=plus,
        minus=minus,
    )


def half_return_forward(x: float, nf: NormalFormSystem, coeffs: ReturnCoefficients | None = None) -> float:
    """Left-ray coordinate after flowing (x, rho x) forward under X+ and jumping."""
    if not x > 0:
        raise ValueError(f"x must be > 0, got {x!r}")
    coeffs = coeffs or return_coefficients(nf)
    hit_x, _ = focus_flow(coeffs.t_plus, (x, nf.rho * x), coeffs.plus)
    if not hit_x < 0:
        raise ArithmeticError(f"forward orbit reached x = {hit_x!r}, expected the left ray")
    return jump_apply(SigmaPoint(Branch.LEFT, hit_x), nf.jump).coordinate


def half_return_backward(x: float, nf: NormalFormSystem, coeffs: ReturnCoefficients | None = None) -> float:
    """Left-ray coordinate of the backward X- orbit through the jump preimage of (x, rho x)."""
    if not x > 0:
        raise ValueError(f"x must be > 0, got {x!r}")
    coeffs = coeffs or return_coefficients(nf)
    pre = jump_invert(SigmaPoint(Branch.RIGHT, x), nf.jump).coordinate
    hit_x, _ = focus_flow(-coeffs.t_minus, (pre, nf.rho * pre), coeffs.minus)
    if not hit_x < 0:
        raise ArithmeticError(f"backward orbit reached x = {hit_x!r}, expected the left ray")
    return hit_x
