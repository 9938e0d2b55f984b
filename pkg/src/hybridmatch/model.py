"""Domain types for planar hybrid systems with a broken switching line.

A system is two Hurwitz linear fields, one on each side of the broken line
``Sigma_rho`` (the negative x-axis joined to the ray ``y = rho*x, x >= 0``),
plus a power-law jump map applied whenever an orbit reaches the line.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

Point = Tuple[float, float]


class HybridSpecError(ValueError):
    """Base class for invalid system descriptions."""


class HurwitzError(HybridSpecError):
    """Matrix is not Hurwitz (hypothesis H1)."""


class CrossingError(HybridSpecError):
    """Crossing property fails on one branch of the switching line."""

    def __init__(self, message: str, branch: str, reason: str):
        super().__init__(message)
        self.branch = branch
        self.reason = reason


class Branch(enum.Enum):
    LEFT = "left"
    RIGHT = "right"
    ORIGIN = "origin"


class Side(enum.IntEnum):
    """Half-plane label; the value is the sign of ``h_rho`` on that side."""

    PLUS = 1
    MINUS = -1

    @property
    def symbol(self) -> str:
        return "+" if self is Side.PLUS else "-"


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class Matrix2:
    b11: float
    b12: float
    b21: float
    b22: float

    def __post_init__(self):
        if not _finite(self.b11, self.b12, self.b21, self.b22):
            raise HybridSpecError(f"matrix entries must be finite: {self}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "Matrix2":
        arr = np.asarray(rows, dtype=float)
        if arr.shape != (2, 2):
            raise HybridSpecError(f"expected a 2x2 matrix, got shape {arr.shape}")
        return cls(*(float(v) for v in arr.ravel()))

    @property
    def trace(self) -> float:
        return self.b11 + self.b22

    @property
    def det(self) -> float:
        return self.b11 * self.b22 - self.b12 * self.b21

    def rows(self) -> list:
        return [[self.b11, self.b12], [self.b21, self.b22]]

    def as_array(self) -> np.ndarray:
        return np.array(self.rows(), dtype=float)

    def apply(self, p: Point) -> Point:
        x, y = p
        return (self.b11 * x + self.b12 * y, self.b21 * x + self.b22 * y)


@dataclass(frozen=True)
class HurwitzMatrix:
    """A 2x2 matrix with trace < 0 and det > 0.

    ``trace`` and ``neg_det`` are the companion-form parameters sigma and
    delta (``delta = -det < 0``).
    """

    m: Matrix2

    def __post_init__(self):
        if not (self.m.trace < 0 and self.m.det > 0):
            raise HurwitzError(
                f"H1 violated: trace ≥ 0 or det ≤ 0 "
                f"(trace={self.m.trace!r}, det={self.m.det!r})"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> "HurwitzMatrix":
        return cls(Matrix2.from_rows(rows))

    @property
    def trace(self) -> float:
        return self.m.trace

    @property
    def neg_det(self) -> float:
        return -self.m.det

    def is_companion(self, tol: float = 0.0) -> bool:
        """True if the matrix already has the shape [[sigma, delta], [1, 0]]."""
        return abs(self.m.b21 - 1.0) <= tol and abs(self.m.b22) <= tol


@dataclass(frozen=True)
class SwitchingLine:
    rho: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho >= 0):
            raise HybridSpecError(f"rho must be finite and >= 0, got {self.rho!r}")

    def h(self, p: Point) -> float:
        x, y = p
        return y if x <= 0 else y - self.rho * x

    def grad_h(self, p: Point) -> Point:
        """Gradient of ``h_rho`` on the branch containing ``p`` (left at x = 0)."""
        return (0.0, 1.0) if p[0] <= 0 else (-self.rho, 1.0)

    def side_of(self, p: Point) -> Side | None:
        v = self.h(p)
        if v > 0:
            return Side.PLUS
        if v < 0:
            return Side.MINUS
        return None

    def embed(self, coordinate: float) -> Point:
        if coordinate <= 0:
            return (coordinate, 0.0)
        return (coordinate, self.rho * coordinate)


@dataclass(frozen=True)
class SigmaPoint:
    """A point of the switching line stored as (branch, signed x-coordinate)."""

    branch: Branch
    coordinate: float

    def __post_init__(self):
        c = self.coordinate
        if not math.isfinite(c):
            raise HybridSpecError(f"coordinate must be finite, got {c!r}")
        if self.branch is Branch.LEFT and c > 0:
            raise HybridSpecError("left-branch coordinate must be <= 0")
        if self.branch is Branch.RIGHT and c < 0:
            raise HybridSpecError("right-branch coordinate must be >= 0")
        if self.branch is Branch.ORIGIN and c != 0:
            raise HybridSpecError("origin coordinate must be 0")

    @classmethod
    def at(cls, coordinate: float) -> "SigmaPoint":
        if coordinate < 0:
            return cls(Branch.LEFT, coordinate)
        if coordinate > 0:
            return cls(Branch.RIGHT, coordinate)
        return cls(Branch.ORIGIN, 0.0)

    def point(self, line: SwitchingLine) -> Point:
        if self.branch is Branch.RIGHT:
            return (self.coordinate, line.rho * self.coordinate)
        return (self.coordinate, 0.0)


@dataclass(frozen=True)
class JumpMap:
    a: float = 1.0
    b: float = 1.0
    r: float = 1.0
    s: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "r", "s"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise HybridSpecError(f"jump parameter {name} must be finite and > 0, got {v!r}")

    @property
    def is_identity(self) -> bool:
        return self.a == self.b == self.r == self.s == 1.0


@dataclass(frozen=True)
class HybridSystemSpec:
    """The user-facing system ``(X+, X-; Sigma_rho; phi_rho)``.

    Construction checks the crossing property and raises
    :class:`CrossingError` when it fails.
    """

    b_plus: HurwitzMatrix
    b_minus: HurwitzMatrix
    line: SwitchingLine
    jump: JumpMap

    def __post_init__(self):
        from .normal_form import crossing_check

        violation = crossing_check(self.b_plus, self.b_minus, self.line.rho)
        if violation is not None:
            raise CrossingError(str(violation), violation.branch, violation.reason)

    @classmethod
    def build(cls, b_plus, b_minus, rho: float = 0.0, a: float = 1.0, b: float = 1.0,
              r: float = 1.0, s: float = 1.0) -> "HybridSystemSpec":
        """Build from raw 2x2 row lists and scalars."""
        return cls(HurwitzMatrix.from_rows(b_plus), HurwitzMatrix.from_rows(b_minus),
                   SwitchingLine(rho), JumpMap(a, b, r, s))

    @property
    def rho(self) -> float:
        return self.line.rho

    def matrix(self, side: Side) -> HurwitzMatrix:
        return self.b_plus if side is Side.PLUS else self.b_minus

    def field(self, side: Side, p: Point) -> Point:
        return self.matrix(side).m.apply(p)

    def outgoing_side(self, q: Point) -> Side:
        """Side entered by the flow leaving ``q`` on the switching line.

        Uses the sign of <X(q), grad h(q)>; both fields agree on it by the
        crossing property.
        """
        g = self.line.grad_h(q)
        v = self.field(Side.PLUS, q)
        dot = v[0] * g[0] + v[1] * g[1]
        if dot == 0:
            v = self.field(Side.MINUS, q)
            dot = v[0] * g[0] + v[1] * g[1]
        if dot == 0:
            raise HybridSpecError(f"no transversal direction at {q}")
        return Side.PLUS if dot > 0 else Side.MINUS


def jump_apply(p: SigmaPoint, jump: JumpMap, line: SwitchingLine | None = None) -> SigmaPoint:
    """Apply the power-law jump; each branch is mapped to itself.

    ``line`` is accepted for symmetry with the planar picture; the
    coordinate form does not need it.
    """
    if p.branch is Branch.LEFT:
        return SigmaPoint(Branch.LEFT, -jump.a * abs(p.coordinate) ** jump.r)
    if p.branch is Branch.RIGHT:
        return SigmaPoint(Branch.RIGHT, jump.b * p.coordinate ** jump.s)
    return p


def jump_invert(p: SigmaPoint, jump: JumpMap, line: SwitchingLine | None = None) -> SigmaPoint:
    if p.branch is Branch.LEFT:
        return SigmaPoint(Branch.LEFT, -abs(p.coordinate / jump.a) ** (1.0 / jump.r))
    if p.branch is Branch.RIGHT:
        return SigmaPoint(Branch.RIGHT, (p.coordinate / jump.b) ** (1.0 / jump.s))
    return p
