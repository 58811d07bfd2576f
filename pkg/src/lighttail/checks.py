"""Acceptance checks with fixed parameters.

Each check returns one or more :class:`CheckResult` rows; ``run_all`` runs
the whole suite and ``format_report`` renders one line per row.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .bench import fit_rate
from .expansion import erlang_pair_predict, m1_predict, thm1_predict, thm4_predict
from .models import CATALOG, LightTailModel, parse_model, truncated_exp_moment
from .oracle import DEFAULT_REL_TOL, conv_tail, partial_conv_integral
from .rv import (
    drees_bound_check,
    geometric_grid,
    karamata_index_estimate,
    pure_power,
    second_order_limit,
    second_order_ratio,
)

__all__ = [
    "CheckResult",
    "A4_MODELS",
    "check_oracle_exactness",
    "check_gamma_pair",
    "check_weibull_self_convolution",
    "check_branch_suite",
    "check_properties",
    "run_all",
    "format_report",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _model(name: str) -> LightTailModel:
    return parse_model(CATALOG[name])


def _erlang_log_tail(n: int, t: float) -> float:
    return -t + math.log(math.fsum(t ** k / math.factorial(k) for k in range(n)))


def check_oracle_exactness(rel_tol: float = DEFAULT_REL_TOL, bound: float = 1e-8) -> list[CheckResult]:
    """Gamma(z,1) * Gamma(z,1) against the Erlang(2z,1) tail."""
    out = []
    for shape in (2, 1):
        g = parse_model(f"gamma:shape={shape},rate=1")
        worst = 0.0
        for t in (1.0, 5.0, 10.0, 20.0, 40.0):
            got = conv_tail(g, g, t, rel_tol=rel_tol, strict=False).log_value
            worst = max(worst, abs(math.expm1(got - _erlang_log_tail(2 * shape, t))))
        out.append(CheckResult(f"A1.gamma{shape}_vs_erlang{2 * shape}", worst <= bound,
                               f"max rel err {worst:.3g} (bound {bound:g})"))
    return out


A2_GRID = (20.0, 40.0, 80.0, 160.0)


def check_gamma_pair() -> list[CheckResult]:
    """Second-order error <= 6/t^2 and fitted slopes for the Erlang(2) pair."""
    g = _model("gamma2")
    out = []
    for label, fn in (("displayed", lambda t: erlang_pair_predict(g, t)),
                      ("thm4", lambda t: thm4_predict(g, g, t))):
        e1, e2, ok = [], [], True
        for t in A2_GRID:
            exact = _erlang_log_tail(4, t)
            res = fn(t)
            e1.append((t, abs(math.expm1(res.first_order_log_tail - exact))))
            e2.append((t, abs(math.expm1(res.predicted_log_tail - exact))))
            ok &= e2[-1][1] <= 6.0 / t ** 2
        worst = max(e * t * t for t, e in e2)
        out.append(CheckResult(f"A2.{label}.bound", ok, f"max t^2*rel_err2 = {worst:.3f} (bound 6)"))
        s2, s1 = fit_rate(e2).slope, fit_rate(e1).slope
        out.append(CheckResult(f"A2.{label}.slopes", abs(s2 + 2) <= 0.15 and abs(s1 + 1) <= 0.1,
                               f"second-order slope {s2:.3f} (want -2 +- 0.15), first-order {s1:.3f} (want -1 +- 0.1)"))
    return out


A3_GRID = tuple(2.0 ** k for k in range(10, 15))


def weibull_deficit(F: LightTailModel, t: float, leading: float, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """``chi(t/2)^(1/2) P(X1+X2>t) / (t F(t/2)^2) - leading``."""
    log_conv = conv_tail(F, F, t, rel_tol=rel_tol).log_value
    chi_half = float(F.factor(np.float64(0.5 * t)))
    return math.exp(0.5 * math.log(chi_half) + log_conv - math.log(t) - 2.0 * F.log_survival(0.5 * t)) - leading


def check_weibull_self_convolution(leading_scale: float = 1.0) -> list[CheckResult]:
    """Oracle deficit against the two second-order terms for the Weibull example."""
    F = _model("weibull_root")
    ds = []
    ratio = math.nan
    for t in A3_GRID:
        res = thm1_predict(F, t, leading_scale=leading_scale)
        d = weibull_deficit(F, t, res.leading)
        ds.append((t, abs(d)))
        if t == 4096.0:
            ratio = d / math.fsum(v for _, v in res.corrections)
    slope = fit_rate(ds).slope
    return [
        CheckResult("A3.ratio", 0.85 <= ratio <= 1.15, f"D/(corr1+corr2) at t=4096: {ratio:.4f} (want [0.85, 1.15])"),
        CheckResult("A3.slope", abs(slope + 0.5) <= 0.05, f"slope of |D|: {slope:.4f} (want -0.5 +- 0.05)"),
    ]


A4_MODELS = ("c_minus1", "c_minus1_log", "c_minus1.5", "c_minus2", "c_minus3", "gamma2")
A4_GRID = (100.0, 200.0, 400.0)


def branch_residuals(F: LightTailModel, G: LightTailModel, grid=A4_GRID):
    """(t, |M - first order|, |M - second order|) with M the oracle's partial integral over F(t)."""
    rows = []
    for t in grid:
        m = math.exp(partial_conv_integral(F, G, t) - F.log_survival(t))
        res = m1_predict(F, G, t)
        rows.append((t, abs(m - res.leading), abs(m - res.total)))
    return rows


def check_branch_suite(models=A4_MODELS) -> list[CheckResult]:
    F = _model("tilted_cubic")
    out = []
    for name in models:
        G = _model(name)
        rows = branch_residuals(F, G)
        closer = all(r2 < r1 for _, r1, r2 in rows)
        s1 = fit_rate([(t, r1) for t, r1, _ in rows]).slope
        s2 = fit_rate([(t, r2) for t, _, r2 in rows]).slope
        gain = s1 - s2
        out.append(CheckResult(
            f"A4.{name}", closer and gain >= 0.3,
            f"{G.factor.name or name}: second order closer at all t: {closer}; "
            f"slopes first {s1:.3f}, second {s2:.3f}, gain {gain:.3f} (want >= 0.3)"))
    return out


def _sub(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failed check, not a crashed report
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, ok, detail, time.perf_counter() - t0)


def _karamata() -> tuple[bool, str]:
    worst = 0.0
    for idx in (0.0, 0.5, 2.0):
        f = pure_power(idx)
        worst = max(worst, abs(karamata_index_estimate(f, 0.0, 10.0, "head") - (idx + 1)))
    for idx in (-1.5, -3.0):
        f = pure_power(idx)
        worst = max(worst, abs(karamata_index_estimate(f, 10.0, 10.0, "tail") - (-idx - 1)))
    chi = _model("weibull_root").factor
    chi_err = abs(karamata_index_estimate(chi, 1.0, 1e6, "head") - 1.5)
    return worst <= 1e-9 and chi_err <= 1e-3, f"pure powers max err {worst:.2g}; chi at 1e6 err {chi_err:.2g}"


def _hua_joe() -> tuple[bool, str]:
    worst = 0.0
    for f in (_model("weibull_root").factor, _model("tilted_cubic").factor):
        for x in (0.25, 0.5, 2.0, 4.0):
            want = second_order_limit(f.index, f.second_index, x)
            worst = max(worst, abs(second_order_ratio(f, 1e4, x) / want - 1))
    return worst <= 1e-3, f"max rel deviation at t=1e4: {worst:.2g}"


def _drees() -> tuple[bool, str]:
    grid = geometric_grid(1e2, 1e6, 0.25, 4.0)
    reports = [drees_bound_check(_model(n).factor, grid, 0.1, 0.1) for n in ("weibull_root", "tilted_cubic")]
    bad = sum(len(r.violations) for r in reports)
    return bad == 0, f"{bad} violation(s) on {len(grid)} grid points per function"


PROPERTY_PAIRS = (("weibull_root", "weibull_root"), ("tilted_cubic", "c_minus1"), ("tilted_cubic", "gamma2"),
                  ("c_minus1.5", "c_minus3"), ("gamma1", "c_minus1_log"))


def _symmetry() -> tuple[bool, str]:
    worst = 0.0
    for a, b in PROPERTY_PAIRS:
        F, G = _model(a), _model(b)
        for t in (10.0, 100.0, 400.0):
            worst = max(worst, abs(math.expm1(conv_tail(F, G, t).log_value - conv_tail(G, F, t).log_value)))
    return worst <= 2e-10, f"max rel asymmetry {worst:.2g}"


def _dominance() -> tuple[bool, str]:
    ts = np.geomspace(1.0, 400.0, 25)
    bad = []
    for a, b in PROPERTY_PAIRS:
        F, G = _model(a), _model(b)
        vals = [conv_tail(F, G, float(t)).log_value for t in ts]
        floor = [max(F.log_survival(float(t)), G.log_survival(float(t))) for t in ts]
        if any(v < fl - 1e-12 * abs(fl) for v, fl in zip(vals, floor)) or np.any(np.diff(vals) > 0):
            bad.append(f"{a}*{b}")
    return not bad, "all pairs dominate max(F, G) and decrease" if not bad else f"failed: {', '.join(bad)}"


L_ALPHA_MODELS = ("weibull_root", "tilted_cubic") + A4_MODELS


def l_alpha_deviation(m: LightTailModel, t: float = 300.0, u_max: float = 5.0) -> float:
    """max over 0 < u <= u_max of |S(t-u) e^{-alpha u} / S(t) - 1|."""
    u = np.linspace(0.0, u_max, 51)[1:]
    return float(np.max(np.abs(np.expm1(m.log_survival(t - u) - m.log_survival(t) - m.rate * u))))


def _l_alpha() -> tuple[bool, str]:
    devs = {n: l_alpha_deviation(_model(n)) for n in L_ALPHA_MODELS}
    worst = max(devs, key=devs.get)
    n_bad = sum(d > 1e-3 for d in devs.values())
    return n_bad == 0, f"{n_bad}/{len(devs)} models exceed 1e-3 at t=300; worst {worst} {devs[worst]:.3g}"


def _half_ratio() -> tuple[bool, str]:
    F = _model("weibull_root")
    t = 4096.0
    rho, al = F.factor.index, F.rate
    lhs = math.exp(2.0 * F.log_survival(0.5 * t) - partial_conv_integral(F, F, t))
    rhs = 2.0 ** (2 - rho / 2) * math.sqrt(rho * (1 - rho)) * math.sqrt(float(F.factor(np.float64(t)))) / (
        al * math.sqrt(math.pi) * t)
    r = lhs / rhs
    return abs(r - 1) <= 0.05, f"corner/half-integral ratio over its limit at t=4096: {r:.4f}"


def _truncated() -> tuple[bool, str]:
    worst = 0.0
    for n in ("gamma2", "tilted_cubic", "c_minus1.5", "weibull_root"):
        m = _model(n)
        for t in (10.0, 100.0):
            d = truncated_exp_moment(m, t, method="direct")
            i = truncated_exp_moment(m, t, method="identity")
            worst = max(worst, abs(i / d - 1))
    return worst <= 1e-8, f"max rel gap direct vs identity {worst:.2g}"


def check_properties() -> list[CheckResult]:
    return [
        _sub("A5.karamata", _karamata),
        _sub("A5.hua_joe_ratio", _hua_joe),
        _sub("A5.drees_bounds", _drees),
        _sub("A5.oracle_symmetry", _symmetry),
        _sub("A5.dominance_monotone", _dominance),
        _sub("A5.l_alpha_ratio", _l_alpha),
        _sub("A5.corner_ratio", _half_ratio),
        _sub("A5.truncated_identity", _truncated),
    ]


def run_all(*, leading_scale: float = 1.0, oracle_rel_tol: float = DEFAULT_REL_TOL,
            only: Optional[set[str]] = None) -> list[CheckResult]:
    """Run A1-A5 (or the subset named in ``only``), timing each group."""
    groups = [
        ("A1", lambda: check_oracle_exactness(oracle_rel_tol)),
        ("A2", check_gamma_pair),
        ("A3", lambda: check_weibull_self_convolution(leading_scale)),
        ("A4", check_branch_suite),
        ("A5", check_properties),
    ]
    out = []
    for key, fn in groups:
        if only and key not in only:
            continue
        t0 = time.perf_counter()
        rows = fn()
        dt = time.perf_counter() - t0
        out.extend(r if r.seconds else CheckResult(r.name, r.passed, r.detail, dt / len(rows)) for r in rows)
    return out


def format_report(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}" for r in results]
    n_bad = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_bad}/{len(results)} checks passed")
    return "\n".join(lines)
