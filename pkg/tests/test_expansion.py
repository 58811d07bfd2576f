import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lighttail.expansion import (
    ExpansionResult,
    ShapeKind,
    compute_shape_integral,
    erlang_pair_predict,
    m1_predict,
    m2_predict,
    thm1_coefficients,
    thm1_predict,
    thm4_predict,
)
from lighttail.models import CATALOG, HypothesisError, exp_moment, first_exp_moment, parse_model
from lighttail.oracle import conv_tail, partial_conv_integral

MODELS = {name: parse_model(spec) for name, spec in CATALOG.items()}
TILTED = sorted(n for n in CATALOG if n != "weibull_root")


# -- shape integrals ----------------------------------------------------------------

@pytest.mark.parametrize("beta, gamma, expected", [(0, 0, 0.5), (1, 1, 1 / 12), (-3, 1, 0.5), (2, 0, 7 / 24)])
def test_base_values(beta, gamma, expected):
    assert compute_shape_integral("base", beta, gamma) == pytest.approx(expected, rel=1e-14)


def test_two_substitutions_agree():
    plain = compute_shape_integral(ShapeKind.BASE, -3, 1, power=1.0)
    squared = compute_shape_integral(ShapeKind.BASE, -3, 1, power=2.0)
    assert abs(plain - squared) <= 1e-12
    assert plain == pytest.approx(0.5, rel=1e-12)


def _dr(y, r):
    return mpmath.log(y) if r == 0 else (y ** r - 1) / r


MP_INTEGRANDS = {
    ShapeKind.BASE: lambda b, g, r: lambda u: (1 - u) ** b * u ** g,
    ShapeKind.AUX_TAIL: lambda b, g, r: lambda u: _dr(1 - u, r) * (1 - u) ** b * u ** g,
    ShapeKind.SHIFT: lambda b, g, r: lambda u: (1 - u) ** (b - 1) * u ** g * (2 * u - 1),
    ShapeKind.AUX_HEAD: lambda b, g, r: lambda u: (1 - u) ** (b - 1) * u ** (g + 1) * _dr(2 * u, r),
    ShapeKind.LOG: lambda b, g, r: lambda u: (1 - u) ** (b - 1) * mpmath.log(u),
    ShapeKind.BETWEEN: lambda b, g, r: lambda u: ((1 - u) ** b - 1) * u ** g,
}


@pytest.mark.parametrize("kind", list(ShapeKind))
@pytest.mark.parametrize("beta, gamma, rho", [(-3.0, 1.0, -1.0), (-3.0, -0.5, -4.0), (0.5, -0.9, 0.0),
                                              (-1.5, -1.5, -0.25), (1.0, 2.0, -2.0)])
def test_against_mpmath(kind, beta, gamma, rho):
    try:
        got = compute_shape_integral(kind, beta, gamma, rho)
    except ValueError:
        pytest.skip("divergent for these exponents")
    # u = v**10 tames every endpoint singularity allowed here, independently of the
    # substitution the implementation picks
    q = 10
    with mpmath.workdps(30):
        f = MP_INTEGRANDS[kind](mpmath.mpf(beta), mpmath.mpf(gamma), mpmath.mpf(rho))
        top = mpmath.mpf(1) / 2
        ref = mpmath.quad(lambda v: f(v ** q) * q * v ** (q - 1), [0, top ** (mpmath.mpf(1) / q) / 2, top ** (mpmath.mpf(1) / q)])
    assert got == pytest.approx(float(ref), rel=1e-11, abs=1e-14)


def test_divergent_shape_integral_rejected():
    with pytest.raises(ValueError, match="diverges"):
        compute_shape_integral("base", 0.0, -1.0)


# -- Weibull self-convolution ---------------------------------------------------------

def test_thm1_coefficients():
    lead, c_chi, c_t = thm1_coefficients(1.0, 0.5)
    assert lead == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert c_chi == pytest.approx(-2 ** -4.5 * math.sqrt(math.pi) * 1.5 * 2.5 / 0.25 ** 1.5, rel=1e-15)
    assert c_chi == pytest.approx(-2.3499, abs=1e-4)
    assert c_t == pytest.approx(-1.2533, abs=1e-4)


def test_thm1_terms_scale_like_root_t():
    F = MODELS["weibull_root"]
    for t in (1024.0, 4096.0):
        res = thm1_predict(F, t)
        names = [n for n, _ in res.corrections]
        assert names == ["chi_inverse", "chi_over_t"]
        chi = float(F.factor(t))
        assert res.correction("chi_inverse") * chi == pytest.approx(-2.3499640074665633, rel=1e-14)
        assert res.error_order == "o(A1(t)*chi(t) + 1/chi(t) + chi(t)^(1/2)/t)"


@pytest.mark.parametrize("t", [16.0, 100.0, 1234.5, 1e5])
def test_restated_square_root_form(t):
    # chi(t) = sqrt(t), alpha = b = 1
    F = parse_model("weibull:rate=1,rho=0.5,k=0")
    res = thm1_predict(F, t)
    bracket = 2 ** 0.25 * math.sqrt(math.pi) - 2 ** -0.25 * math.sqrt(math.pi) * (1 + 15 / 8) * t ** -0.5
    restated = 0.75 * math.log(t) + 2 * F.log_survival(t / 2) + math.log(bracket)
    assert res.predicted_log_tail == pytest.approx(restated, abs=1e-12 * abs(restated))


def test_thm1_rejections():
    with pytest.raises(HypothesisError, match="Weibull-type"):
        thm1_predict(MODELS["gamma2"], 100.0)
    with pytest.raises(HypothesisError, match="join"):
        thm1_predict(MODELS["weibull_root"], 6.0)


def test_leading_scale_hook():
    F = MODELS["weibull_root"]
    base, bumped = thm1_predict(F, 500.0), thm1_predict(F, 500.0, leading_scale=1.01)
    assert bumped.leading == pytest.approx(1.01 * base.leading, rel=1e-15)
    assert bumped.corrections == base.corrections


# -- half-range integrals and the combined expansion ------------------------------------

@pytest.mark.parametrize("name", TILTED)
def test_every_catalog_model_has_one_branch(name):
    res = m1_predict(MODELS["tilted_cubic"], MODELS[name], 300.0)
    assert res.branch in {"G_MINUS1_INF", "G_MINUS1_FIN", "G_BETWEEN_M2_M1", "G_MINUS2_INF",
                          "G_LE_MINUS2_FIN", "G_GT_MINUS1"}
    assert math.isfinite(res.predicted_log_tail)


def test_beta_zero_terms_vanish():
    # F exponential: b = 1, so the beta-weighted and A2 pieces drop out
    res = m1_predict(MODELS["gamma1"], MODELS["gamma2"], 200.0)
    assert res.correction("A2") == 0.0
    i0 = compute_shape_integral("base", 0.0, 1.0)
    tc = 200.0 * MODELS["gamma2"].tilt(200.0)
    assert res.correction("t_inverse") == pytest.approx(-tc * 2 * 2 * i0 / 200.0, rel=1e-14)


def test_m2_mirror_for_erlang_measure():
    # F(t)^-1-free piece: G(t) [m_F - (zeta - 1)/t * int u e^u dF]
    F, G, t = MODELS["tilted_cubic"], MODELS["gamma2"], 250.0
    res = m2_predict(F, G, t)
    assert res.leading == pytest.approx(exp_moment(F), rel=1e-14)
    assert res.correction("t_inverse") == pytest.approx(-first_exp_moment(F) / t, rel=1e-12)
    assert res.log_scale == G.log_survival(t)


def test_self_convolution_of_tilted_cubic():
    F, t = MODELS["tilted_cubic"], 300.0
    res = thm4_predict(F, F, t)
    m, m1 = exp_moment(F), first_exp_moment(F)
    assert res.leading == pytest.approx(2 * m, rel=1e-14)
    assert math.fsum(v for _, v in res.corrections) == pytest.approx(2 * 3 * m1 / t, rel=1e-12)


def test_displayed_gamma_pair_matches_general_leading():
    G = MODELS["gamma2"]
    for t in (20.0, 160.0):
        shown = erlang_pair_predict(G, t)
        assert shown.leading == pytest.approx(1 / 12, rel=1e-15)
        assert shown.correction("t_inverse") * t == pytest.approx(1 / 6, rel=1e-14)
        # the displayed form keeps only the leading t of c(t) = 1 + t
        general = thm4_predict(G, G, t)
        assert general.first_order_log_tail == pytest.approx(
            shown.first_order_log_tail + math.log1p(1 / t), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(f=st.sampled_from(TILTED), g=st.sampled_from(TILTED), t=st.floats(5, 5000))
def test_exchange_symmetry(f, g, t):
    a, b = thm4_predict(MODELS[f], MODELS[g], t), thm4_predict(MODELS[g], MODELS[f], t)
    assert a.predicted_log_tail == b.predicted_log_tail
    assert a.first_order_log_tail == b.first_order_log_tail
    assert sorted(v for _, v in a.corrections) == sorted(v for _, v in b.corrections)


def test_thm4_is_weighted_sum_of_halves():
    F, G, t = MODELS["tilted_cubic"], MODELS["c_minus1.5"], 180.0
    full, p1, p2 = thm4_predict(F, G, t), m1_predict(F, G, t), m2_predict(F, G, t)
    lhs = math.exp(full.predicted_log_tail)
    rhs = math.exp(p1.predicted_log_tail) + math.exp(p2.predicted_log_tail)
    assert lhs == pytest.approx(rhs, rel=1e-13)


@pytest.mark.parametrize("name", ["tilted_cubic", "c_minus3", "c_minus2", "c_minus1.5", "c_minus1_log"])
def test_first_order_self_convolution_limit(name):
    F = MODELS[name]
    ratio = math.exp(conv_tail(F, F, 400.0).log_value - F.log_survival(400.0))
    assert ratio == pytest.approx(2 * exp_moment(F), rel=0.02)


ACCEPTANCE_PAIRS = [("tilted_cubic", g) for g in ("c_minus1", "c_minus1_log", "c_minus1.5", "c_minus2",
                                                "c_minus3", "gamma2")] + [("gamma2", "gamma2")]


@pytest.mark.parametrize("f, g", ACCEPTANCE_PAIRS)
@pytest.mark.parametrize("t", [100.0, 200.0, 400.0, 800.0])
def test_second_order_gain_combined(f, g, t):
    F, G = MODELS[f], MODELS[g]
    oracle = conv_tail(F, G, t).log_value
    res = thm4_predict(F, G, t)
    assert abs(math.expm1(res.predicted_log_tail - oracle)) < abs(math.expm1(res.first_order_log_tail - oracle))


@pytest.mark.parametrize("t", [100.0, 200.0, 400.0, 800.0])
def test_second_order_gain_weibull(t):
    F = MODELS["weibull_root"]
    oracle = conv_tail(F, F, t).log_value
    res = thm1_predict(F, t)
    assert abs(math.expm1(res.predicted_log_tail - oracle)) < abs(math.expm1(res.first_order_log_tail - oracle))


def test_m1_second_order_beats_first_for_fast_branch():
    F, G = MODELS["tilted_cubic"], MODELS["c_minus3"]
    for t in (100.0, 400.0):
        truth = math.exp(partial_conv_integral(F, G, t) - F.log_survival(t))
        res = m1_predict(F, G, t)
        assert abs(truth - res.total) < 0.1 * abs(truth - res.leading)


def test_rejections():
    F, G = MODELS["tilted_cubic"], MODELS["gamma2"]
    with pytest.raises(HypothesisError, match="Theorem 4 requires tilted-RV factors"):
        thm4_predict(MODELS["weibull_root"], G, 100.0)
    with pytest.raises(HypothesisError, match="join"):
        thm4_predict(F, G, 0.5)
    with pytest.raises(HypothesisError, match="rate"):
        thm4_predict(F, parse_model("gamma:shape=2,rate=2"), 100.0)
    steep = parse_model("tilted:rate=1,beta=-0.5,rho2=-4")
    with pytest.raises(HypothesisError, match="gamma \\+ rho3 \\+ 1 > 0"):
        m1_predict(F, steep, 100.0)


def test_result_properties():
    r = ExpansionResult("X", 2.0, (("a", -0.5), ("b", 0.25)), -10.0, "o(1)")
    assert r.total == 1.75
    assert r.predicted_log_tail == pytest.approx(-10 + math.log(1.75))
    assert r.first_order_log_tail == pytest.approx(-10 + math.log(2.0))
    assert math.isnan(ExpansionResult("X", 1.0, (("a", -2.0),), 0.0, "").predicted_log_tail)
