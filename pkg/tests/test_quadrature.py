import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lighttail.quadrature import QuadratureError, log_quad, logsumexp, quad


def test_polynomial_exact():
    assert quad(lambda u: u ** 2, 0.0, 1.0).value == pytest.approx(1 / 3, rel=1e-15)


@pytest.mark.parametrize("power, expected", [(-1.5, 2.0), (-2.0, 1.0), (-3.0, 0.5)])
def test_improper_power_tail(power, expected):
    res = quad(lambda u: (1 + u) ** power, 0.0, math.inf, rel_tol=1e-12)
    assert res.value == pytest.approx(expected, rel=1e-9)


def test_divergent_tail_raises():
    with pytest.raises(QuadratureError):
        quad(lambda u: u ** 2, 1.0, math.inf)


def test_breakpoints_handle_kinks():
    res = quad(lambda u: np.abs(u - 0.3), 0.0, 1.0, points=[0.3], rel_tol=1e-13)
    assert res.value == pytest.approx(0.5 * (0.3 ** 2 + 0.7 ** 2), rel=1e-13)


def test_reversed_limits_flip_sign():
    assert quad(np.exp, 1.0, 0.0).value == pytest.approx(-(math.e - 1), rel=1e-13)


def test_log_quad_far_below_underflow():
    # int_0^1 exp(-1e5 + u) du = e^-1e5 (e - 1)
    res = log_quad(lambda u: -1e5 + u, 0.0, 1.0, rel_tol=1e-12)
    assert res.log_value == pytest.approx(-1e5 + math.log(math.e - 1), abs=1e-10)


def test_log_quad_improper():
    res = log_quad(lambda u: -2.0 * u, 0.0, math.inf, rel_tol=1e-12)
    assert res.log_value == pytest.approx(math.log(0.5), abs=1e-11)


def test_logsumexp_matches_numpy():
    vals = [-1000.0, -1001.0, -999.5]
    ref = -999.5 + math.log1p(math.exp(-0.5) + math.exp(-1.5))
    assert logsumexp(vals) == pytest.approx(ref, abs=1e-13)
    assert logsumexp([-math.inf, -math.inf]) == -math.inf


@settings(max_examples=40, deadline=None)
@given(coefs=st.lists(st.floats(-5, 5), min_size=1, max_size=8),
       a=st.floats(-3, 3), width=st.floats(0.01, 5))
def test_polynomials_match_antiderivative(coefs, a, width):
    b = a + width
    p = np.polynomial.Polynomial(coefs)
    exact = p.integ()(b) - p.integ()(a)
    scale = np.polynomial.Polynomial(np.abs(coefs)).integ()(abs(b) + abs(a)) + 1.0
    assert abs(quad(p, a, b).value - exact) <= 1e-12 * scale
