"""Node/focus classification of companion matrices and the invariant-line regions.

The regions partition one open half-plane by the eigenlines ``x = r*y`` of
``[[sigma, delta], [1, 0]]``.  They are written for the plus side; the minus
side uses the point reflection ``p -> -p``, which maps the lower picture onto
the upper one and flips every inequality.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .model import Point, Side, SwitchingLine


class Kind(enum.Enum):
    N1 = "N1"
    N2 = "N2"
    F = "F"


class Region(enum.Enum):
    R1 = "R1"
    E1 = "E1"
    R2 = "R2"
    E2 = "E2"
    R3 = "R3"
    S1 = "S1"
    E = "E"
    S2 = "S2"
    WHOLE = "Whole"


class Fate(enum.Enum):
    CONVERGES_TO_ORIGIN = "ConvergesToOrigin"
    HITS_SIGMA_FORWARD = "HitsSigmaForward"
    BOTH = "Both"


_REGIONS = {
    Kind.N1: {Region.R1, Region.E1, Region.R2, Region.E2, Region.R3},
    Kind.N2: {Region.S1, Region.E, Region.S2},
    Kind.F: {Region.WHOLE},
}


def disc_tolerance(sigma: float) -> float:
    return 1e-9 * max(1.0, sigma * sigma)


@dataclass(frozen=True)
class SpectralData:
    """Eigen-data of ``[[sigma, delta], [1, 0]]``.

    N1 fills ``r1 > r2``; N2 sets ``r1 = r2 = sigma/2``; F fills ``lam`` and
    ``mu``.
    """

    kind: Kind
    sigma: float
    delta: float
    r1: float | None = None
    r2: float | None = None
    lam: float | None = None
    mu: float | None = None

    @property
    def r(self) -> float:
        if self.kind is not Kind.N2:
            raise AttributeError("repeated eigenvalue only defined for N2")
        return self.r1

    @property
    def is_focus(self) -> bool:
        return self.kind is Kind.F


def classify(sigma: float, delta: float) -> SpectralData:
    if not (sigma < 0 and delta < 0):
        raise ValueError(f"need sigma < 0 and delta < 0, got ({sigma!r}, {delta!r})")
    disc = sigma * sigma + 4.0 * delta
    if abs(disc) <= disc_tolerance(sigma):
        half = sigma / 2.0
        return SpectralData(Kind.N2, sigma, delta, r1=half, r2=half)
    if disc > 0:
        # r2 has no cancellation; r1 from the product r1*r2 = -delta
        r2 = (sigma - math.sqrt(disc)) / 2.0
        r1 = -delta / r2
        return SpectralData(Kind.N1, sigma, delta, r1=r1, r2=r2)
    return SpectralData(Kind.F, sigma, delta, lam=sigma / 2.0, mu=math.sqrt(-disc) / 2.0)


def _cmp(x: float, ry: float) -> int:
    d = x - ry
    if abs(d) <= 1e-12 * max(abs(x), abs(ry)):
        return 0
    return 1 if d > 0 else -1


def region_of(p: Point, spec: SpectralData, side: Side, line: SwitchingLine) -> Region:
    """Region of a normal-form point strictly inside the half-plane ``side``."""
    h = line.h(p)
    if h == 0:
        raise ValueError(f"{p} lies on the switching line")
    if (h > 0) != (side is Side.PLUS):
        raise ValueError(f"{p} is not on the {side.symbol} side")
    if spec.kind is Kind.F:
        return Region.WHOLE
    x, y = p if side is Side.PLUS else (-p[0], -p[1])
    if spec.kind is Kind.N2:
        c = _cmp(x, spec.r * y)
        return {1: Region.S1, 0: Region.E, -1: Region.S2}[c]
    c1 = _cmp(x, spec.r1 * y)
    if c1 > 0:
        return Region.R1
    if c1 == 0:
        return Region.E1
    c2 = _cmp(x, spec.r2 * y)
    if c2 > 0:
        return Region.R2
    if c2 == 0:
        return Region.E2
    return Region.R3


def predicted_fate(region: Region) -> Fate:
    if region in (Region.R3, Region.S2):
        return Fate.HITS_SIGMA_FORWARD
    if region is Region.WHOLE:
        return Fate.BOTH
    return Fate.CONVERGES_TO_ORIGIN


def regions_for(kind: Kind) -> set:
    return set(_REGIONS[kind])
