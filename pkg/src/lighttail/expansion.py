"""Second-order tail expansions for convolutions of light-tailed laws.

* :func:`thm1_predict` -- self-convolution of a Weibull-type tail
  ``exp(-alpha t + chi(t))``.
* :func:`m1_predict` / :func:`m2_predict` -- the two half-range integrals
  ``int_0^{t/2} F(t-u) dG(u)`` and its mirror, normalised by ``F(t)`` and
  ``G(t)``, for tilted tails ``b(t) e^{-alpha t}`` and ``c(t) e^{-alpha t}``.
* :func:`thm4_predict` -- their combination ``F(t) M1 + G(t) M2``.

Every prediction is an :class:`ExpansionResult` carrying the leading term and
each correction separately, so the first-order prediction is always
available by dropping the corrections.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Optional

import numpy as np

from .models import (
    BranchLabel,
    HypothesisError,
    LightTailModel,
    ModelKind,
    classify_branch,
    exp_moment,
    first_exp_moment,
)
from .quadrature import quad

__all__ = [
    "ShapeKind",
    "ExpansionResult",
    "compute_shape_integral",
    "thm1_coefficients",
    "thm1_predict",
    "m1_predict",
    "m2_predict",
    "thm4_predict",
    "erlang_pair_predict",
]

RUNNING_TOL = 1e-10
SHAPE_TOL = 1e-13


class ShapeKind(enum.Enum):
    """Fixed integrals over (0, 1/2) appearing in the expansion constants.

    With ``D_r(y) = (y**r - 1)/r`` (``log y`` at r = 0):

    BASE      (1-u)^b u^g
    AUX_TAIL  D_r(1-u) (1-u)^b u^g
    SHIFT     (1-u)^(b-1) u^g (2u - 1)
    AUX_HEAD  (1-u)^(b-1) u^(g+1) D_r(2u)
    LOG       (1-u)^(b-1) log u
    BETWEEN   ((1-u)^b - 1) u^g
    """

    BASE = "base"
    AUX_TAIL = "aux_tail"
    SHIFT = "shift"
    AUX_HEAD = "aux_head"
    LOG = "log"
    BETWEEN = "between"


def _dr_log(log_y, r):
    """``(y**r - 1)/r`` from ``log y``; ``log y`` itself at r = 0."""
    return log_y if r == 0 else np.expm1(r * log_y) / r


def _integrand(kind: ShapeKind, b: float, g: float, r: float):
    if kind is ShapeKind.BASE:
        return lambda u: (1 - u) ** b * u ** g
    if kind is ShapeKind.AUX_TAIL:
        return lambda u: _dr_log(np.log1p(-u), r) * (1 - u) ** b * u ** g
    if kind is ShapeKind.SHIFT:
        return lambda u: (1 - u) ** (b - 1) * u ** g * (2 * u - 1)
    if kind is ShapeKind.AUX_HEAD:
        return lambda u: (1 - u) ** (b - 1) * u ** (g + 1) * _dr_log(np.log(2 * u), r)
    if kind is ShapeKind.LOG:
        return lambda u: (1 - u) ** (b - 1) * np.log(u)
    return lambda u: np.expm1(b * np.log1p(-u)) * u ** g


def _leading_exponent(kind: ShapeKind, g: float, r: float) -> tuple[float, bool]:
    """Power of u at u -> 0 and whether a log factor is present."""
    if kind is ShapeKind.BASE or kind is ShapeKind.SHIFT:
        return g, False
    if kind is ShapeKind.AUX_TAIL or kind is ShapeKind.BETWEEN:
        return g + 1, False
    if kind is ShapeKind.AUX_HEAD:
        return g + 1 + min(r, 0.0), r == 0
    return 0.0, True


def _poly_integral(b: int, g: int, extra: Optional[tuple[int, int]] = None) -> Fraction:
    """int_0^{1/2} (1-u)^b u^g [ * (c0 + c1 u) ] du exactly."""
    half = Fraction(1, 2)
    total = Fraction(0)
    mults = [(0, 1)] if extra is None else [(0, extra[0]), (1, extra[1])]
    for k in range(b + 1):
        coef = math.comb(b, k) * (-1) ** k
        for shift, m in mults:
            p = g + k + shift + 1
            total += coef * m * half ** p / p
    return total


def _is_nonneg_int(x: float) -> bool:
    return x >= 0 and float(x).is_integer()


@lru_cache(maxsize=4096)
def _shape_cached(kind: ShapeKind, b: float, g: float, r: float, power: float) -> float:
    if kind is ShapeKind.BASE and _is_nonneg_int(b) and _is_nonneg_int(g):
        return float(_poly_integral(int(b), int(g)))
    if kind is ShapeKind.SHIFT and _is_nonneg_int(b - 1) and _is_nonneg_int(g):
        return float(_poly_integral(int(b - 1), int(g), extra=(-1, 2)))
    f = _integrand(kind, b, g, r)
    if power == 1.0:
        return quad(f, 0.0, 0.5, rel_tol=SHAPE_TOL, abs_tol=1e-300).value
    p = power
    # u = v**p with v in (0, 0.5**(1/p))
    return quad(lambda v: f(v ** p) * p * v ** (p - 1.0), 0.0, 0.5 ** (1.0 / p),
                rel_tol=SHAPE_TOL, abs_tol=1e-300).value


def compute_shape_integral(kind: ShapeKind | str, beta: float, gamma: float = 0.0,
                           rho: float = 0.0, power: Optional[float] = None) -> float:
    """One of the constants of :class:`ShapeKind` for exponents beta, gamma, rho.

    Nonnegative integer exponents use exact polynomial antiderivatives. Other
    cases use adaptive quadrature after ``u = v**p``, with ``p`` chosen so the
    transformed integrand vanishes linearly at 0 whenever the original one is
    singular there. ``power`` overrides that choice.
    """
    kind = ShapeKind(kind)
    e, has_log = _leading_exponent(kind, gamma, rho)
    if e <= -1:
        raise ValueError(f"{kind.value} integral diverges at 0 for beta={beta}, gamma={gamma}, rho={rho}")
    if power is None:
        power = 2.0 / (1.0 + e) if (e < 1 or has_log) else 1.0
    return _shape_cached(kind, float(beta), float(gamma), float(rho), float(power))


# -- results ---------------------------------------------------------------------


@dataclass(frozen=True)
class ExpansionResult:
    """Term-by-term asymptotic prediction.

    The predicted quantity is ``exp(log_scale) * (leading + sum(corrections))``.
    """

    branch: str
    leading: float
    corrections: tuple[tuple[str, float], ...]
    log_scale: float
    error_order: str
    parts: tuple["ExpansionResult", ...] = field(default=(), compare=False)

    @property
    def total(self) -> float:
        return math.fsum([self.leading, *(v for _, v in self.corrections)])

    @property
    def predicted_log_tail(self) -> float:
        tot = self.total
        return self.log_scale + math.log(tot) if tot > 0 else math.nan

    @property
    def first_order_log_tail(self) -> float:
        return self.log_scale + math.log(self.leading) if self.leading > 0 else math.nan

    def correction(self, name: str) -> float:
        return dict(self.corrections)[name]


# -- Weibull-type self-convolution -------------------------------------------------


def thm1_coefficients(alpha: float, rho: float) -> tuple[float, float, float]:
    """(leading, coefficient of 1/chi(t), coefficient of chi(t)/t)."""
    rr = rho * (1.0 - rho)
    lead = 0.5 * alpha * math.sqrt(math.pi / rr)
    c_chi = -(2.0 ** (rho - 5.0)) * alpha * math.sqrt(math.pi) * (rho - 2.0) * (rho - 3.0) / rr ** 1.5
    c_t = -(2.0 ** -rho) * math.sqrt(rho * math.pi / (1.0 - rho))
    return lead, c_chi, c_t


def thm1_predict(F: LightTailModel, t: float, *, leading_scale: float = 1.0) -> ExpansionResult:
    """Second-order prediction of ``P(X1 + X2 > t)`` for Weibull-type F.

    The result's scale is ``t F(t/2)^2 / chi(t/2)^(1/2)``. ``leading_scale``
    multiplies the leading constant and exists for sensitivity checks only.
    """
    if F.kind is not ModelKind.WEIBULL:
        raise HypothesisError("the Weibull self-convolution expansion requires a Weibull-type model exp(-alpha t + chi(t))")
    chi = F.factor
    rho, rho1 = chi.index, chi.second_index
    if not 0 < rho < 1:
        raise HypothesisError(f"the Weibull self-convolution expansion requires 0 < rho < 1, got rho={rho}")
    if chi.has_auxiliary and not rho + rho1 < 0:
        raise HypothesisError(f"the Weibull self-convolution expansion requires rho + rho1 < 0, got {rho} + {rho1}")
    if chi.derivative is None:
        raise HypothesisError("the Weibull self-convolution expansion requires a differentiable chi")
    grid = np.geomspace(max(F.join, 1e-6), 1e8, 200)
    if np.any(np.diff(chi.derivative(grid)) > 1e-15):
        raise HypothesisError("the Weibull self-convolution expansion requires chi' nonincreasing beyond the join point")
    if not t > 2.0 * F.join:
        raise HypothesisError(f"t={t:g} must exceed twice the join point {F.join:g}")
    lead, c_chi, c_t = thm1_coefficients(F.rate, rho)
    chi_t = float(chi(np.float64(t)))
    log_scale = math.log(t) + 2.0 * F.log_survival(0.5 * t) - 0.5 * math.log(float(chi(np.float64(0.5 * t))))
    return ExpansionResult(
        branch="THM1",
        leading=leading_scale * lead,
        corrections=(("chi_inverse", c_chi / chi_t), ("chi_over_t", c_t * chi_t / t)),
        log_scale=log_scale,
        error_order="o(A1(t)*chi(t) + 1/chi(t) + chi(t)^(1/2)/t)",
    )


# -- tilted tails: half-range integrals and their combination ------------------------


def _aux(m: LightTailModel, t: float) -> float:
    return float(m.factor.auxiliary(np.float64(t))) if m.factor.has_auxiliary else 0.0


def _admissible(F: LightTailModel, G: LightTailModel, t: float) -> None:
    for m in (F, G):
        if m.kind is ModelKind.WEIBULL:
            raise HypothesisError("Theorem 4 requires tilted-RV factors; got a Weibull-type model")
    if not math.isclose(F.rate, G.rate, rel_tol=1e-12):
        raise HypothesisError(f"both tails must share the rate alpha; got {F.rate} and {G.rate}")
    floor = max(F.join, G.join, 1.0)
    if not t > floor:
        raise HypothesisError(f"t={t:g} is not beyond the join points (need t > {floor:g})")


def _half_terms(X: LightTailModel, Y: LightTailModel, t: float):
    """M1 for tail side X (b, beta, rho2, A2) and measure side Y (c, gamma, rho3, A3).

    Returns (branch, leading, corrections, error_order), unscaled.
    """
    al = X.rate
    beta, rho2 = X.index, X.factor.second_index
    gam, rho3 = Y.index, Y.factor.second_index
    a2, a3 = _aux(X, t), _aux(Y, t)
    branch = classify_branch(Y)
    classify_branch(X)
    c_t = Y.tilt(t)
    B = BranchLabel

    if branch is B.G_MINUS1_INF:
        head = Y.tilt_integral(0.0, 0.5 * t, rel_tol=RUNNING_TOL)
        k = math.log(2.0) * (1.0 - 2.0 ** -beta)
        if beta != 0:
            k += beta * compute_shape_integral(ShapeKind.LOG, beta)
        return (branch, al * head, (("t_c", al * t * c_t * k), ("unit", 1.0)),
                "o(1 + t*c(t) + A2(t)*int_0^{t/2} c)")

    if branch is B.G_GT_MINUS1:
        if Y.factor.has_auxiliary and not gam + rho3 + 1 > 0:
            raise HypothesisError(
                f"the index > -1 case requires gamma + rho3 + 1 > 0, got {gam} + {rho3} + 1")
        i0 = compute_shape_integral(ShapeKind.BASE, beta, gam)
        tc = t * c_t
        a2_term = 0.0
        if a2 != 0.0:
            a2_term = tc * al * compute_shape_integral(ShapeKind.AUX_TAIL, beta, gam, rho2) * a2
        shift = compute_shape_integral(ShapeKind.SHIFT, beta, gam) if beta != 0 else 0.0
        t_term = tc * (beta * shift - 2.0 * (1.0 + gam) * i0) / t
        a3_term = 0.0
        if a3 != 0.0:
            s = gam + rho3 + 1.0
            head = 0.0
            if beta != 0:
                head = 2.0 ** -rho3 * beta / s * compute_shape_integral(ShapeKind.AUX_HEAD, beta, gam, rho3)
            if rho3 == 0:
                coef = -((gam + 1.0) * math.log(2.0) + 1.0) / (gam + 1.0)
            else:
                coef = (2.0 ** -rho3 * (gam + 1.0) - gam - rho3 - 1.0) / (rho3 * s)
            a3_term = tc * al * (head + coef * i0) * a3
        return (branch, tc * al * i0,
                (("A2", a2_term), ("t_inverse", t_term), ("A3", a3_term)),
                "o(1/t + A2(t) + A3(t)) relative to t*c(t)")

    m = exp_moment(Y)
    if branch is B.G_MINUS1_FIN:
        tail = Y.tilt_tail_integral(0.5 * t, rel_tol=RUNNING_TOL)
        return branch, m, (("tail_integral", -al * tail),), "o(int_{t/2}^inf c + A2(t))"
    if branch is B.G_BETWEEN_M2_M1:
        k = compute_shape_integral(ShapeKind.BETWEEN, beta, gam) + 1.0 / ((1.0 + gam) * 2.0 ** (1.0 + gam))
        return branch, m, (("t_c", al * k * t * c_t),), "o(t*c(t) + A2(t))"
    if branch is B.G_MINUS2_INF:
        lo = 1.0
        pts = [Y.join] if lo < Y.join < 0.5 * t else []
        run = quad(lambda u: u * Y.tilt(u), lo, 0.5 * t, rel_tol=RUNNING_TOL, points=pts).value
        return (branch, m, (("t_inverse", -al * beta * run / t),),
                "o(t^-1 int_1^{t/2} u c(u) du + A2(t))")
    m1 = first_exp_moment(Y)
    return branch, m, (("t_inverse", -beta * m1 / t),), "o(1/t + A2(t))"


def m1_predict(F: LightTailModel, G: LightTailModel, t: float) -> ExpansionResult:
    """``int_0^{t/2} F(t-u) dG(u) = F(t) * M1``; scale is ``F(t)``."""
    _admissible(F, G, t)
    branch, lead, corr, order = _half_terms(F, G, t)
    return ExpansionResult(branch.name, lead, corr, F.log_survival(t), order)


def _boundary(F: LightTailModel, G: LightTailModel, t: float, log_scale: float) -> float:
    """``2^(-beta-gamma) b(t) c(t) e^{-alpha t}`` relative to ``exp(log_scale)``."""
    return 2.0 ** -(F.index + G.index) * math.exp(
        (F.log_tilt(t) + G.log_tilt(t)) - F.rate * t - log_scale)


def m2_predict(F: LightTailModel, G: LightTailModel, t: float) -> ExpansionResult:
    """``int_0^{t/2} G(t-u) dF(u) + F(t/2) G(t/2) = G(t) * M2``; scale is ``G(t)``.

    The corner product enters explicitly, as ``2^(-beta-gamma) b(t)``, only
    in the ``beta > -1`` case.
    """
    _admissible(F, G, t)
    branch, lead, corr, order = _half_terms(G, F, t)
    log_scale = G.log_survival(t)
    if F.index > -1:
        corr = corr + (("boundary", _boundary(F, G, t, log_scale)),)
    return ExpansionResult(branch.name, lead, corr, log_scale, order)


def thm4_predict(F: LightTailModel, G: LightTailModel, t: float) -> ExpansionResult:
    """``P(X + Y > t) = F(t) M1 + G(t) M2`` for tilted-RV tails.

    The corner term ``F(t/2) G(t/2)`` is added whenever either index exceeds
    -1, which keeps the prediction symmetric in (F, G).
    """
    _admissible(F, G, t)
    lf, lg = F.log_survival(t), G.log_survival(t)
    s = max(lf, lg)
    w1, w2 = math.exp(lf - s), math.exp(lg - s)
    b1, lead1, corr1, ord1 = _half_terms(F, G, t)
    b2, lead2, corr2, ord2 = _half_terms(G, F, t)
    corrections = [(f"M1.{n}", w1 * v) for n, v in corr1] + [(f"M2.{n}", w2 * v) for n, v in corr2]
    if F.index > -1 or G.index > -1:
        corrections.append(("boundary", _boundary(F, G, t, s)))
    parts = (
        ExpansionResult(b1.name, lead1, tuple(corr1), lf, ord1),
        ExpansionResult(b2.name, lead2, tuple(corr2), lg, ord2),
    )
    return ExpansionResult(
        branch=f"{b1.name}|{b2.name}",
        leading=math.fsum([w1 * lead1, w2 * lead2]),
        corrections=tuple(corrections),
        log_scale=s,
        error_order=f"F(t)*[{ord1}] + G(t)*[{ord2}]",
        parts=parts,
    )


def erlang_pair_predict(G: LightTailModel, t: float) -> ExpansionResult:
    """Closed-form self-convolution prediction for an Erlang(shape, alpha) tail.

    ``2 alpha^(z-1)/Gamma(z) t^z G(t) [alpha I1 + ((z-1) I2 + 2^(-2(z-1)-1)) / t]``
    with ``I1 = int_0^{1/2} (1-y)^(z-1) y^(z-1) dy`` and
    ``I2 = int_0^{1/2} (1-y)^(z-2) y^z dy``.
    """
    if G.kind is not ModelKind.GAMMA or G.shape is None or G.shape < 2:
        raise HypothesisError("the closed-form Erlang prediction needs a Gamma model with shape >= 2")
    z, al = G.shape, G.rate
    i1 = compute_shape_integral(ShapeKind.BASE, z - 1, z - 1)
    i2 = compute_shape_integral(ShapeKind.BASE, z - 2, z)
    log_scale = math.log(2.0) + (z - 1) * math.log(al) - math.lgamma(z) + z * math.log(t) + G.log_survival(t)
    return ExpansionResult(
        branch="G_GT_MINUS1|G_GT_MINUS1",
        leading=al * i1,
        corrections=(("t_inverse", ((z - 1) * i2 + 2.0 ** (-2 * (z - 1) - 1)) / t),),
        log_scale=log_scale,
        error_order="o(1/t)",
    )
