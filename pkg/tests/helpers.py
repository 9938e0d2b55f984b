"""Random system generators shared by the test modules.

For rho > 0 the companion reduction only exists for matrices already in
companion form, so generators return companion matrices there and general
(randomly conjugated) matrices only at rho == 0.
"""

import math

import numpy as np

from hybridmatch.model import CrossingError, HurwitzError, HybridSystemSpec

WORKED_EXAMPLE = dict(b_plus=[[-2.0, -2.0], [1.0, 0.0]], b_minus=[[-2.0, -2.0], [1.0, 0.0]],
                      rho=0.0, a=1.0, b=1.0, r=3.0, s=3.0)

WORKED_YAML = """\
# companion focus on both sides, cubic jumps
B_plus: [[-2, -2], [1, 0]]
B_minus: [[-2, -2], [1, 0]]
rho: 0
jump: {a: 1, b: 1, r: 3, s: 3}
"""


def worked_example() -> HybridSystemSpec:
    return HybridSystemSpec.build(**WORKED_EXAMPLE)


def companion_rows(sigma, delta):
    return [[sigma, delta], [1.0, 0.0]]


def focus_eigs(rng):
    """(lam, mu) with lam/mu bounded away from 0 so orbits contract at a steady rate."""
    mu = rng.uniform(0.3, 3.0)
    lam = -mu * rng.uniform(0.15, 1.5)
    return lam, mu


def focus_companion(rng):
    lam, mu = focus_eigs(rng)
    return companion_rows(2 * lam, -(lam * lam + mu * mu))


def node_companion(rng, repeated=False):
    if repeated:
        r = -rng.uniform(0.3, 3.0)
        return companion_rows(2 * r, -r * r)
    e1, e2 = -rng.uniform(0.3, 3.0, size=2)
    return companion_rows(e1 + e2, -e1 * e2)


def _random_basis(rng):
    while True:
        p = rng.uniform(-2.0, 2.0, size=(2, 2))
        if abs(np.linalg.det(p)) > 0.3 and np.linalg.cond(p) < 20:
            return p


def conjugated(rows, rng, b21_sign):
    """A random similar matrix whose lower-left entry has the requested sign."""
    a = np.asarray(rows, dtype=float)
    while True:
        p = _random_basis(rng)
        m = p @ a @ np.linalg.inv(p)
        if m[1, 0] * b21_sign > 1e-3:
            return m.tolist()


def focus_pair_spec(rng, rho=None, jump=None, general_at_zero=True):
    """Focus-focus system on the domain where the normal form is valid."""
    if rho is None:
        rho = 0.0 if rng.random() < 0.3 else rng.uniform(0.0, 5.0)
    jump = jump or {}
    bp, bm = focus_companion(rng), focus_companion(rng)
    if rho == 0.0 and general_at_zero:
        sign = 1.0 if rng.random() < 0.5 else -1.0
        bp, bm = conjugated(bp, rng, sign), conjugated(bm, rng, sign)
    return HybridSystemSpec.build(bp, bm, rho, **jump)


def node_case_spec(rng):
    """System with at least one N1 or N2 side and the crossing property."""
    kinds = ["N1", "N2", "F"]
    while True:
        k_plus = kinds[rng.integers(3)]
        k_minus = kinds[rng.integers(2)] if k_plus == "F" else kinds[rng.integers(3)]
        mats = []
        for k in (k_plus, k_minus):
            mats.append(focus_companion(rng) if k == "F" else node_companion(rng, repeated=(k == "N2")))
        if rng.random() < 0.5:
            rho = 0.0
            sign = 1.0 if rng.random() < 0.5 else -1.0
            mats = [conjugated(m, rng, sign) for m in mats]
        else:
            rho = rng.uniform(0.0, 5.0)
        try:
            return HybridSystemSpec.build(mats[0], mats[1], rho)
        except (HurwitzError, CrossingError):
            continue


def random_hurwitz(rng, scale=3.0):
    while True:
        m = rng.uniform(-scale, scale, size=(2, 2))
        if np.trace(m) < 0 and np.linalg.det(m) > 0:
            return m.tolist()


def rel(a, b):
    return abs(a - b) / max(abs(a), abs(b), math.ulp(0.0))
