import math

import pytest
from hypothesis import given, strategies as st

from hybridmatch.model import (
    Branch,
    CrossingError,
    HurwitzError,
    HurwitzMatrix,
    HybridSpecError,
    HybridSystemSpec,
    JumpMap,
    Side,
    SigmaPoint,
    SwitchingLine,
    jump_apply,
    jump_invert,
)

positive = st.floats(min_value=0.1, max_value=10.0)
exponent = st.floats(min_value=0.25, max_value=4.0)
magnitude = st.floats(min_value=1e-3, max_value=1e3)


def test_saddle_rejected_with_h1_message():
    with pytest.raises(HurwitzError, match="H1 violated"):
        HurwitzMatrix.from_rows([[1, 0], [0, -1]])


def test_zero_trace_rejected():
    with pytest.raises(HurwitzError):
        HurwitzMatrix.from_rows([[0, -1], [1, 0]])


def test_bad_shape_and_nonfinite_entries():
    with pytest.raises(HybridSpecError):
        HurwitzMatrix.from_rows([[1, 2, 3], [4, 5, 6]])
    with pytest.raises(HybridSpecError):
        HurwitzMatrix.from_rows([[math.nan, 0], [0, -1]])


def test_negative_rho_rejected():
    with pytest.raises(HybridSpecError):
        SwitchingLine(-0.5)


@pytest.mark.parametrize("field", ["a", "b", "r", "s"])
def test_jump_parameters_must_be_positive(field):
    with pytest.raises(HybridSpecError):
        JumpMap(**{field: 0.0})


def test_switching_function_and_sides():
    line = SwitchingLine(2.0)
    assert line.h((-1.0, 3.0)) == 3.0
    assert line.h((1.0, 3.0)) == 1.0
    assert line.side_of((1.0, 1.0)) is Side.MINUS
    assert line.side_of((1.0, 2.0)) is None
    assert line.embed(3.0) == (3.0, 6.0)
    assert line.embed(-3.0) == (-3.0, 0.0)


def test_sigma_point_branch_consistency():
    assert SigmaPoint.at(-2.0).branch is Branch.LEFT
    assert SigmaPoint.at(0.0).branch is Branch.ORIGIN
    with pytest.raises(HybridSpecError):
        SigmaPoint(Branch.LEFT, 1.0)
    with pytest.raises(HybridSpecError):
        SigmaPoint(Branch.ORIGIN, 1e-300)


def test_jump_values():
    jump = JumpMap(a=2.0, b=3.0, r=2.0, s=0.5)
    assert jump_apply(SigmaPoint(Branch.LEFT, -3.0), jump).coordinate == -18.0
    assert jump_apply(SigmaPoint(Branch.RIGHT, 4.0), jump).coordinate == 6.0
    assert jump_apply(SigmaPoint(Branch.ORIGIN, 0.0), jump).branch is Branch.ORIGIN


@given(a=positive, b=positive, r=exponent, s=exponent, x=magnitude, left=st.booleans())
def test_jump_round_trip(a, b, r, s, x, left):
    jump = JumpMap(a, b, r, s)
    p = SigmaPoint(Branch.LEFT, -x) if left else SigmaPoint(Branch.RIGHT, x)
    image = jump_apply(p, jump)
    assert image.branch is p.branch
    back = jump_invert(image, jump)
    assert back.branch is p.branch
    assert abs(back.coordinate - p.coordinate) <= 1e-12 * x


def test_star_node_fails_crossing_on_right_ray():
    with pytest.raises(CrossingError, match="Σ²_ρ") as info:
        HybridSystemSpec.build([[-1, 0], [0, -1]], [[-1, 0], [0, -1]], rho=1.0)
    assert info.value.branch == "sigma2"
    assert info.value.reason == "tangency"


def test_opposite_rotation_fails_crossing():
    with pytest.raises(CrossingError) as info:
        HybridSystemSpec.build([[-1, -1], [1, -1]], [[-1, 1], [-1, -1]], rho=0.0)
    assert info.value.reason == "orientation"


def test_outgoing_side_follows_rotation():
    spec = HybridSystemSpec.build([[-1, -1], [1, -1]], [[-1, -1], [1, -1]], rho=0.0)
    assert spec.outgoing_side((1.0, 0.0)) is Side.PLUS
    assert spec.outgoing_side((-1.0, 0.0)) is Side.MINUS
    clockwise = HybridSystemSpec.build([[-1, 1], [-1, -1]], [[-1, 1], [-1, -1]], rho=0.0)
    assert clockwise.outgoing_side((1.0, 0.0)) is Side.MINUS
