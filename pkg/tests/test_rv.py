import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lighttail.quadrature import QuadratureError
from lighttail.rv import (
    PowerFunction,
    drees_bound_check,
    geometric_grid,
    hua_joe_construct,
    karamata_index_estimate,
    measure_index,
    pure_power,
    rv_product,
    second_order_limit,
    second_order_ratio,
)


@pytest.fixture
def chi():
    # t^{1/2} (1 - t^-2 / 2)
    return hua_joe_construct(1.0, 0.5, -2.0, PowerFunction(1.0, -2.0))


def test_hua_joe_value(chi):
    assert chi(4.0) == pytest.approx(1.9375, rel=1e-15)


def test_slowly_varying_limit():
    f = hua_joe_construct(1.0, 0.0, -1.0, PowerFunction(1.0, -1.0))
    assert f(1e9) == pytest.approx(1.0, abs=1e-8)
    assert f(10.0) == pytest.approx(0.9)


def test_second_order_ratio_example(chi):
    assert second_order_ratio(chi, 1e4, 4.0) == pytest.approx(15 / 16, abs=1e-3)


@pytest.mark.parametrize("x", [0.25, 0.5, 2.0, 4.0])
def test_round_trip(chi, x):
    want = second_order_limit(0.5, -2.0, x)
    assert second_order_ratio(chi, 1e4, x) == pytest.approx(want, rel=1e-3)


@settings(max_examples=50, deadline=None)
@given(index=st.floats(-4, 1), rho=st.floats(-4, -0.25), coef=st.floats(0.1, 3),
       x=st.floats(0.25, 4), t=st.floats(1e3, 1e5))
def test_round_trip_property(index, rho, coef, x, t):
    f = hua_joe_construct(1.0, index, rho, PowerFunction(coef, rho))
    want = second_order_limit(index, rho, x)
    got = second_order_ratio(f, t, x)
    # exact construction: the ratio equals the limit up to the factor 1/(1 + A(t)/rho)
    assert got == pytest.approx(want / (1 + coef * t ** rho / rho), rel=1e-9, abs=1e-12)


@given(t=st.floats(2, 1e6))
def test_ratio_vanishes_at_one(t):
    chi = hua_joe_construct(1.0, 0.5, -2.0, PowerFunction(1.0, -2.0))
    assert second_order_ratio(chi, t, 1.0) == 0.0


def test_exact_power_has_zero_deviation():
    f = pure_power(2.0, auxiliary=PowerFunction(1.0, -1.0))
    for t in (10.0, 1e3):
        for x in (0.5, 3.0):
            assert second_order_ratio(f, t, x) == pytest.approx(0.0, abs=1e-12)


def test_karamata_pure_powers():
    assert karamata_index_estimate(pure_power(2.0), 0.0, 7.0, "head") == pytest.approx(3.0, rel=1e-13)
    assert karamata_index_estimate(pure_power(-2.0), 0.0, 7.0, "tail") == pytest.approx(1.0, rel=1e-10)


def test_karamata_chi_head():
    chi = hua_joe_construct(1.0, 0.5, -2.0, PowerFunction(-1.0, -2.0))
    assert karamata_index_estimate(chi, 1.0, 1e6, "head") == pytest.approx(1.5, abs=1e-3)


def test_karamata_divergent_tail():
    with pytest.raises(QuadratureError):
        karamata_index_estimate(pure_power(-0.5), 0.0, 10.0, "tail")


def test_drees_example(chi):
    grid = [(t, x) for t in (1e3, 1e4) for x in (0.5, 2.0, 8.0)]
    assert drees_bound_check(chi, grid, 0.1, 0.1).ok


def test_drees_pure_power_never_violates():
    grid = geometric_grid(10.0, 1e6, 0.1, 10.0)
    assert drees_bound_check(pure_power(-1.7), grid, 1e-9, 0.0).ok


def test_drees_zero_eps_flags_everything(chi):
    grid = [(t, x) for t in (1e3, 1e4) for x in (0.5, 2.0)]
    report = drees_bound_check(chi, grid, 0.0, 0.1)
    assert {(v.t, v.x) for v in report.violations if v.order == "first"} == set(grid)


def test_product_index():
    f = hua_joe_construct(1.0, -3.0, -4.0, PowerFunction(1.0, -4.0))
    g = hua_joe_construct(1.0, 0.5, -1.0, PowerFunction(2.0, -1.0))
    h = rv_product(f, g)
    assert h.index == -2.5 and h.second_index == -1.0
    assert measure_index(h, 1e6) == pytest.approx(-2.5, abs=1e-3)


@pytest.mark.parametrize("kwargs", [
    dict(scale=1.0, index=0.5, second_index=0.5, auxiliary=PowerFunction(1.0, 0.5)),
    dict(scale=-1.0, index=0.5, second_index=-2.0, auxiliary=PowerFunction(1.0, -2.0)),
    dict(scale=1.0, index=0.5, second_index=-2.0, auxiliary=PowerFunction(1.0, -1.0)),
    dict(scale=1.0, index=0.5, second_index=-2.0, auxiliary=lambda t: np.asarray(t, float) ** 0.5),
])
def test_hua_joe_rejects_bad_input(kwargs):
    with pytest.raises(ValueError):
        hua_joe_construct(**kwargs)


def test_measure_index_slope():
    assert measure_index(lambda t: 3.0 * np.asarray(t) ** -1.25, 100.0) == pytest.approx(-1.25, abs=1e-12)


def test_derivative_matches_numeric(chi):
    t, h = 50.0, 1e-4
    num = (chi(t + h) - chi(t - h)) / (2 * h)
    assert chi.derivative(t) == pytest.approx(num, rel=1e-8)


def test_log_second_order_limit():
    assert second_order_limit(1.0, 0.0, math.e) == pytest.approx(math.e)
