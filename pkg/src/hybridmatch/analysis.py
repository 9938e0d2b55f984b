"""Displacement map, global verdicts and limit-cycle location.

For two focus sides the displacement is a two-power function

    Delta(x) = alpha * x**r - beta * x**(1/s),

where ``alpha * x**r`` is the jumped forward half-return (negated) and
``beta * x**(1/s)`` the backward one.  Its sign is the sign of
``K * x**r - C_star * x**(1/s)`` with ``K = a * b**(1/s)``, so everything
about the global picture follows from ``K``, ``C_star``, ``r`` and ``1/s``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .flow import (
    FocusFlowParams,
    ReturnCoefficients,
    crossing_time,
    half_return_backward,
    half_return_forward,
    return_coefficients,
)
from .model import HybridSystemSpec, Side
from .normal_form import NormalFormSystem, normalize
from .spectral import Kind, SpectralData, classify

CENTER_RTOL = 1e-12
NEAR_CENTER_RTOL = 1e-6
EXPONENT_RTOL = 1e-12


class Case(enum.Enum):
    GAS_NODE_CASE = "GAS_NodeCase"
    GAS = "GAS"
    GLOBALLY_UNSTABLE = "GloballyUnstable"
    GLOBAL_CENTER = "GlobalCenter"
    LIMIT_CYCLE = "LimitCycle"


@dataclass(frozen=True)
class DisplacementParams:
    K: float
    C_star: float
    exp_left: float
    exp_right: float
    log_K: float
    log_C_star: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("K", "C_star"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ArithmeticError(f"{name} = {v!r} is not a finite positive number")

    @property
    def balanced(self) -> bool:
        """True when ``r == 1/s`` (up to rounding)."""
        return _same_exponent(self.exp_left, self.exp_right)

    def contracts(self, x: float) -> bool:
        """Strict inequality ``K x^r < C_star x^(1/s)``, evaluated in logs."""
        lx = math.log(x)
        return self.log_K + self.exp_left * lx < self.log_C_star + self.exp_right * lx


@dataclass(frozen=True)
class CycleInfo:
    x0: float
    delta_prime: float
    stability: str  # "stable" or "unstable"


@dataclass(frozen=True)
class StabilityVerdict:
    case: Case
    cycle: CycleInfo | None = None
    params: DisplacementParams | None = None
    plus: SpectralData | None = None
    minus: SpectralData | None = None
    near_center: bool = False


def _same_exponent(p: float, q: float) -> bool:
    return abs(p - q) <= EXPONENT_RTOL * max(abs(p), abs(q))


def displacement_params(nf: NormalFormSystem, coeffs: ReturnCoefficients | None = None) -> DisplacementParams:
    coeffs = coeffs or return_coefficients(nf)
    jump = nf.jump
    r, inv_s = jump.r, 1.0 / jump.s
    lam_p, lam_m = coeffs.plus.lam, coeffs.minus.lam
    cp, cm = abs(coeffs.cos_sin_plus), abs(coeffs.cos_sin_minus)
    log_K = math.log(jump.a) + inv_s * math.log(jump.b)
    log_C = abs(lam_m * coeffs.t_minus + lam_p * coeffs.t_plus * r) + math.log(cm) - r * math.log(cp)
    log_alpha = math.log(jump.a) + lam_p * coeffs.t_plus * r + r * math.log(cp)
    log_beta = -lam_m * coeffs.t_minus + math.log(cm) - inv_s * math.log(jump.b)
    return DisplacementParams(
        K=math.exp(log_K), C_star=math.exp(log_C), exp_left=r, exp_right=inv_s,
        log_K=log_K, log_C_star=log_C, alpha=math.exp(log_alpha), beta=math.exp(log_beta),
    )


def displacement(x: float, nf: NormalFormSystem, coeffs: ReturnCoefficients | None = None) -> float:
    """Backward minus forward half-return on the left ray; negative means contraction."""
    coeffs = coeffs or return_coefficients(nf)
    return half_return_backward(x, nf, coeffs) - half_return_forward(x, nf, coeffs)


def displacement_derivative(x: float, nf: NormalFormSystem, params: DisplacementParams | None = None) -> float:
    if not x > 0:
        raise ValueError(f"x must be > 0, got {x!r}")
    p = params or displacement_params(nf)
    r, q = p.exp_left, p.exp_right
    return r * p.alpha * x ** (r - 1.0) - q * p.beta * x ** (q - 1.0)


def limit_cycle(params: DisplacementParams) -> CycleInfo:
    """Unique positive zero of the displacement and its derivative there."""
    r, q = params.exp_left, params.exp_right
    log_x0 = (params.log_C_star - params.log_K) / (r - q)
    x0 = math.exp(log_x0)
    # alpha x0^r = beta x0^q, so Delta'(x0) = (r - q) alpha x0^(r-1)
    delta_prime = (r - q) * math.exp(math.log(params.alpha) + (r - 1.0) * log_x0)
    # r > q: Delta < 0 inside the cycle and > 0 outside, so orbits leave it
    stability = "unstable" if r > q else "stable"
    return CycleInfo(x0=x0, delta_prime=delta_prime, stability=stability)


def verdict_from_params(params: DisplacementParams) -> tuple[Case, CycleInfo | None, bool]:
    if not params.balanced:
        return Case.LIMIT_CYCLE, limit_cycle(params), False
    K, C = params.K, params.C_star
    gap = abs(K - C)
    near = gap <= NEAR_CENTER_RTOL * max(K, C)
    if gap <= CENTER_RTOL * max(K, C):
        return Case.GLOBAL_CENTER, None, near
    return (Case.GAS if K < C else Case.GLOBALLY_UNSTABLE), None, near


def classify_normal_form(nf: NormalFormSystem) -> StabilityVerdict:
    plus = classify(nf.sigma_plus, nf.delta_plus)
    minus = classify(nf.sigma_minus, nf.delta_minus)
    if plus.kind is not Kind.F or minus.kind is not Kind.F:
        return StabilityVerdict(Case.GAS_NODE_CASE, plus=plus, minus=minus)
    params = displacement_params(nf)
    case, cycle, near = verdict_from_params(params)
    return StabilityVerdict(case, cycle=cycle, params=params, plus=plus, minus=minus, near_center=near)


def classify_system(spec: HybridSystemSpec) -> StabilityVerdict:
    return classify_normal_form(normalize(spec))


def rho_dependent_factor(rho: float, r: float, plus: FocusFlowParams, minus: FocusFlowParams) -> float:
    """``|cos(mu- t-) - Phi- sin(mu- t-)| / |cos(mu+ t+) + Phi+ sin(mu+ t+)|**r`` at a given rho."""
    t_p = crossing_time(rho, plus.lam, plus.mu, Side.PLUS)
    t_m = crossing_time(rho, minus.lam, minus.mu, Side.MINUS)
    phi_p = (plus.lam - plus.prod * rho) / plus.mu
    phi_m = (minus.lam - minus.prod * rho) / minus.mu
    cp = math.cos(plus.mu * t_p) + phi_p * math.sin(plus.mu * t_p)
    cm = math.cos(minus.mu * t_m) - phi_m * math.sin(minus.mu * t_m)
    return abs(cm) / abs(cp) ** r


def rho_infinity_ratio(r: float, lambda_p: float, mu_p: float, lambda_m: float, mu_m: float) -> float:
    """Limit of :func:`rho_dependent_factor` as rho grows: 0, inf, or a finite value at r == 1."""
    FocusFlowParams(lambda_p, mu_p)
    FocusFlowParams(lambda_m, mu_m)
    if r > 1:
        return 0.0
    if r < 1:
        return math.inf
    return math.sqrt((lambda_m ** 2 + mu_m ** 2) / (lambda_p ** 2 + mu_p ** 2))
