import math

import numpy as np
import pytest
from scipy.linalg import expm

from hybridmatch.flow import (
    FocusFlowParams,
    NotFocusError,
    crossing_time,
    focus_flow,
    half_return_backward,
    half_return_forward,
    node_flow,
    return_coefficients,
)
from hybridmatch.model import HybridSystemSpec, Side
from hybridmatch.normal_form import normalize
from hybridmatch.spectral import classify

from helpers import rel, worked_example


def test_focus_flow_matches_matrix_exponential():
    params = FocusFlowParams(-0.4, 1.7)
    a = np.array([[2 * params.lam, -params.prod], [1.0, 0.0]])
    for t in (-2.0, 0.3, 5.0):
        expected = expm(t * a) @ np.array([0.7, -1.2])
        assert np.allclose(focus_flow(t, (0.7, -1.2), params), expected, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("sigma, delta", [(-3.0, -2.0), (-2.0, -1.0)])
def test_node_flow_matches_matrix_exponential(sigma, delta):
    a = np.array([[sigma, delta], [1.0, 0.0]])
    data = classify(sigma, delta)
    for t in (0.5, 3.0):
        expected = expm(t * a) @ np.array([1.0, 2.0])
        assert np.allclose(node_flow(t, (1.0, 2.0), data), expected, rtol=1e-12)


def test_focus_params_validation():
    with pytest.raises(ValueError):
        FocusFlowParams(0.1, 1.0)
    with pytest.raises(NotFocusError):
        FocusFlowParams.from_spectral(classify(-3.0, -2.0))


def test_crossing_time_at_rho_zero_is_half_period():
    assert crossing_time(0.0, -1.0, 2.0, Side.PLUS) == math.pi / 2.0
    assert crossing_time(0.0, -1.0, 2.0, Side.MINUS) == math.pi / 2.0


def test_crossing_time_lands_on_left_ray_for_large_rho():
    params = FocusFlowParams(-2.0, 0.5)
    for rho in (1e-3, 1.0, 1e3, 1e6):
        for side, sgn in ((Side.PLUS, 1.0), (Side.MINUS, -1.0)):
            t = crossing_time(rho, params.lam, params.mu, side)
            x, y = focus_flow(sgn * t, (1.0, rho), params)
            assert x < 0
            assert abs(y) <= 1e-10 * (1 + abs(x))


def test_half_returns_on_worked_example():
    nf = normalize(worked_example())
    coeffs = return_coefficients(nf)
    for x in (0.5, 2.0):
        assert rel(half_return_forward(x, nf, coeffs), -math.exp(-3 * math.pi) * x ** 3) < 1e-12
        assert rel(half_return_backward(x, nf, coeffs), -math.exp(math.pi) * x ** (1 / 3)) < 1e-12


def test_half_return_needs_positive_x():
    nf = normalize(worked_example())
    with pytest.raises(ValueError):
        half_return_forward(0.0, nf)


def test_node_side_has_no_half_return():
    spec = HybridSystemSpec.build([[-3.0, -2.0], [1.0, 0.0]], [[-2.0, -2.0], [1.0, 0.0]])
    with pytest.raises(NotFocusError, match=r"\+ side"):
        return_coefficients(normalize(spec))
