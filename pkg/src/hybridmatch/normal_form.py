"""Crossing-property checks and the companion normal form.

Each side ``B`` is conjugated by an explicit matrix ``C`` to
``A = [[sigma, delta], [1, 0]]`` with ``sigma = tr B`` and ``delta = -det B``.
``C`` always fixes the right ray ``y = rho*x`` pointwise.  It fixes the left
ray only when ``rho == 0`` or ``B`` is already in companion form (for
``rho > 0`` the two rays span the plane, so fixing both forces ``C = I``).
:func:`normalize` therefore refuses systems outside that range instead of
returning a reduction that changes the dynamics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    CrossingError,
    HurwitzMatrix,
    HybridSpecError,
    HybridSystemSpec,
    JumpMap,
    Matrix2,
    SwitchingLine,
)

CONJUGATION_TOL = 1e-10
FIX_TOL = 1e-12


class NormalFormError(HybridSpecError):
    """The companion reduction is not a valid equivalence for this system."""


@dataclass(frozen=True)
class CrossingViolation:
    branch: str  # "sigma1" (left ray) or "sigma2" (right ray)
    reason: str  # "tangency" or "orientation"
    detail: str

    def __str__(self) -> str:
        where = "Σ¹" if self.branch == "sigma1" else "Σ²_ρ"
        return f"crossing violated on {where} ({self.reason}): {self.detail}"


def eta(B: HurwitzMatrix | Matrix2, rho: float) -> float:
    """Normal component factor of ``B`` along the right ray: <B(1,rho), (-rho,1)>."""
    m = B.m if isinstance(B, HurwitzMatrix) else B
    return m.b21 + (m.b22 - m.b11) * rho - m.b12 * rho * rho


def crossing_check(b_plus: HurwitzMatrix, b_minus: HurwitzMatrix, rho: float) -> CrossingViolation | None:
    """Return ``None`` when both fields cross both rays the same way.

    The right ray is checked first: it is the branch that depends on
    ``rho``, and star nodes fail there as well as on the left ray.
    """
    ep, em = eta(b_plus, rho), eta(b_minus, rho)
    if ep * em <= 0:
        reason = "tangency" if ep * em == 0 else "orientation"
        return CrossingViolation("sigma2", reason, f"eta+ * eta- = {ep!r} * {em!r}")
    left = b_plus.m.b21 * b_minus.m.b21
    if left <= 0:
        reason = "tangency" if left == 0 else "orientation"
        return CrossingViolation(
            "sigma1", reason,
            f"b21+ * b21- = {b_plus.m.b21!r} * {b_minus.m.b21!r} = {left!r}",
        )
    return None


def conjugation_matrix(B: HurwitzMatrix, rho: float) -> Matrix2:
    """Matrix ``C`` with ``C B C^-1 = [[tr B, -det B], [1, 0]]``."""
    m = B.m
    e = eta(B, rho)
    if e == 0:
        raise CrossingError(f"eta = 0 at rho={rho!r}: field tangent to Σ²_ρ", "sigma2", "tangency")
    delta = B.neg_det
    k = ((delta - m.b12) * rho + m.b22) / e
    q = (m.b12 * rho * rho + m.b11 * rho - 1.0) / e
    return Matrix2(1.0 - k * rho, k, rho + q * rho, -q)


def conjugation_det(B: HurwitzMatrix, rho: float) -> float:
    """Closed-form determinant of :func:`conjugation_matrix`."""
    return -(B.neg_det * rho * rho + B.trace * rho - 1.0) / eta(B, rho)


def companion(sigma: float, delta: float) -> np.ndarray:
    return np.array([[sigma, delta], [1.0, 0.0]])


def conjugate(C: Matrix2, B: HurwitzMatrix) -> np.ndarray:
    """``C B C^-1`` using the adjugate inverse."""
    c = C.as_array()
    adj = np.array([[c[1, 1], -c[0, 1]], [-c[1, 0], c[0, 0]]])
    return c @ B.m.as_array() @ adj / C.det


def conjugation_error(C: Matrix2, B: HurwitzMatrix) -> float:
    return float(np.max(np.abs(conjugate(C, B) - companion(B.trace, B.neg_det))))


def fixing_error(C: Matrix2, rho: float, coordinates=(-3.0, -1.0, -0.25, 0.25, 1.0, 3.0)) -> dict:
    """Worst relative displacement of sampled switching-line points, per branch."""
    line = SwitchingLine(rho)
    out = {"sigma1": 0.0, "sigma2": 0.0}
    for c in coordinates:
        p = line.embed(c)
        q = C.apply(p)
        err = math.hypot(q[0] - p[0], q[1] - p[1]) / math.hypot(*p)
        key = "sigma1" if c < 0 else "sigma2"
        out[key] = max(out[key], err)
    return out


@dataclass(frozen=True)
class NormalFormSystem:
    """Companion-form data for both sides.

    ``swapped`` is set when the conjugations reverse orientation (clockwise
    rotation at ``rho == 0``): the plus fields here then come from ``B-``
    and vice versa, so that plus always means the half-plane swept
    counterclockwise from the right ray.
    """

    sigma_plus: float
    delta_plus: float
    sigma_minus: float
    delta_minus: float
    c_plus: Matrix2
    c_minus: Matrix2
    line: SwitchingLine
    jump: JumpMap
    swapped: bool = False

    def __post_init__(self):
        if not (self.sigma_plus < 0 and self.sigma_minus < 0):
            raise NormalFormError("sigma+- must be negative")
        if not (self.delta_plus < 0 and self.delta_minus < 0):
            raise NormalFormError("delta+- must be negative")
        if self.c_plus.det == 0 or self.c_minus.det == 0:
            raise NormalFormError("conjugation matrix is singular")

    @property
    def rho(self) -> float:
        return self.line.rho

    def a_plus(self) -> np.ndarray:
        return companion(self.sigma_plus, self.delta_plus)

    def a_minus(self) -> np.ndarray:
        return companion(self.sigma_minus, self.delta_minus)


def _check_conjugation(C: Matrix2, B: HurwitzMatrix, rho: float, label: str) -> None:
    err = conjugation_error(C, B)
    scale = max(1.0, abs(B.trace), abs(B.neg_det))
    if not err <= CONJUGATION_TOL * scale:
        raise NormalFormError(f"C{label} B{label} C{label}^-1 misses the companion form by {err:.3e}")
    fix = fixing_error(C, rho)
    if fix["sigma2"] > FIX_TOL:
        raise NormalFormError(f"C{label} moves Σ²_ρ points (error {fix['sigma2']:.3e})")
    if fix["sigma1"] > FIX_TOL:
        raise NormalFormError(
            f"C{label} does not fix Σ¹ (error {fix['sigma1']:.3e}); for rho > 0 the "
            "companion reduction only exists when B is already in companion form"
        )


def normalize(spec: HybridSystemSpec) -> NormalFormSystem:
    rho = spec.rho
    c_plus = conjugation_matrix(spec.b_plus, rho)
    c_minus = conjugation_matrix(spec.b_minus, rho)
    _check_conjugation(c_plus, spec.b_plus, rho, "+")
    _check_conjugation(c_minus, spec.b_minus, rho, "-")

    if (c_plus.det > 0) != (c_minus.det > 0):
        raise NormalFormError("conjugations disagree on orientation")
    swapped = c_plus.det < 0
    if swapped:
        return NormalFormSystem(
            spec.b_minus.trace, spec.b_minus.neg_det, spec.b_plus.trace, spec.b_plus.neg_det,
            c_minus, c_plus, spec.line, spec.jump, swapped=True,
        )
    return NormalFormSystem(
        spec.b_plus.trace, spec.b_plus.neg_det, spec.b_minus.trace, spec.b_minus.neg_det,
        c_plus, c_minus, spec.line, spec.jump,
    )
