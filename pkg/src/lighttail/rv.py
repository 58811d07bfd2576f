"""Regularly varying and second-order regularly varying functions.

A :class:`SecondOrderRVFunction` bundles an eventually positive function with
its first-order index, its second-order index and the auxiliary function that
sets the speed of ``f(tx)/f(t) -> x**index``. The helpers here build such
functions from the Hua-Joe form ``a * t**index * (1 + A(t)/rho)``, measure
their behaviour numerically (Karamata ratios, log-log slopes) and check the
Drees-type uniform bounds on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Optional, Sequence

import numpy as np

from .quadrature import quad

__all__ = [
    "PowerFunction",
    "SecondOrderRVFunction",
    "DreesViolation",
    "DreesReport",
    "hua_joe_construct",
    "pure_power",
    "rv_product",
    "second_order_limit",
    "second_order_ratio",
    "ratio_excess",
    "karamata_index_estimate",
    "measure_index",
    "drees_bound_check",
    "geometric_grid",
]

Func = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PowerFunction:
    """``coef * t**power``, with its derivative."""

    coef: float
    power: float

    def __call__(self, t):
        return self.coef * np.power(t, self.power)

    def derivative(self, t):
        return self.coef * self.power * np.power(t, self.power - 1.0)


ZERO = PowerFunction(0.0, -1.0)


@dataclass(frozen=True)
class SecondOrderRVFunction:
    """An eventually positive function in 2RV(index, second_index).

    ``auxiliary`` is the function A(t) of the second-order limit; it may be
    identically zero for exact powers, in which case only first-order
    statements are meaningful. ``tail_integral``, when given, returns the
    integral of the function over [a, inf) in closed form and is used instead
    of quadrature for slowly decaying tails. ``excess(t, x)``, when given,
    returns ``f(tx)/f(t) - x**index`` without the cancellation of the naive
    difference, which matters once A(t) approaches machine precision.
    """

    evaluate: Func
    index: float
    second_index: float
    auxiliary: Func = ZERO
    derivative: Optional[Func] = None
    scale: float = 1.0
    valid_from: float = 1.0
    tail_integral: Optional[Callable[[float], float]] = None
    name: str = ""
    excess: Optional[Callable[[float, float], float]] = None

    def __post_init__(self):
        if self.second_index > 0:
            raise ValueError(f"second_index must be <= 0, got {self.second_index}")
        if self.valid_from < 0:
            raise ValueError("valid_from must be nonnegative")

    def __call__(self, t):
        return self.evaluate(t)

    @property
    def has_auxiliary(self) -> bool:
        """False when the auxiliary function vanishes identically."""
        if self.auxiliary is ZERO:
            return False
        probe = max(self.valid_from, 1.0) * np.array([2.0, 1e3, 1e6])
        return bool(np.any(np.asarray(self.auxiliary(probe)) != 0.0))

    def check(self, t_max: float = 1e8, points: int = 64) -> None:
        """Verify positivity and decay of |A| on a geometric grid."""
        lo = max(self.valid_from, 1e-12)
        grid = np.geomspace(lo, max(t_max, 10 * lo), points)
        vals = np.asarray(self.evaluate(grid), dtype=float)
        if not np.all(vals > 0):
            bad = grid[~(vals > 0)][0]
            raise ValueError(f"{self.name or 'function'} is not positive at t={bad:g}")
        if self.has_auxiliary:
            aux = np.abs(np.asarray(self.auxiliary(grid), dtype=float))
            if np.any(np.diff(aux[points // 2:]) > 0):
                raise ValueError("|auxiliary| is not decreasing on the sampled grid")


def second_order_limit(index: float, second_index: float, x):
    """The 2RV limit ``x**index * (x**rho - 1)/rho`` (``log x`` at rho = 0)."""
    x = np.asarray(x, dtype=float)
    if second_index == 0:
        out = np.power(x, index) * np.log(x)
    else:
        out = np.power(x, index) * np.expm1(second_index * np.log(x)) / second_index
    return out if out.ndim else float(out)


def _measure_slope(f: Func, t: float, points: int = 32, decades: float = 1.0) -> float:
    s = np.geomspace(t, t * 10.0 ** decades, points)
    y = np.log(np.abs(np.asarray(f(s), dtype=float)))
    return float(np.polyfit(np.log(s), y, 1)[0])


def measure_index(f: Func, t: float, points: int = 32, decades: float = 1.0) -> float:
    """Least-squares slope of log f against log t over ``decades`` from ``t``."""
    return _measure_slope(f, t, points, decades)


def hua_joe_construct(
    scale: float,
    index: float,
    second_index: float,
    auxiliary: Func,
    *,
    valid_from: float = 1.0,
    name: str = "",
) -> SecondOrderRVFunction:
    """Build ``scale * t**index * (1 + auxiliary(t)/second_index)``.

    The o(A) remainder of the representation is taken to be exactly zero.
    When ``auxiliary`` is a :class:`PowerFunction` the derivative is filled in
    analytically.

    >>> chi = hua_joe_construct(1.0, 0.5, -2.0, PowerFunction(1.0, -2.0))
    >>> chi(4.0)
    1.9375
    """
    if second_index >= 0:
        raise ValueError("the Hua-Joe representation needs second_index < 0")
    if scale <= 0:
        raise ValueError("scale must be positive")
    if isinstance(auxiliary, PowerFunction):
        if auxiliary.coef == 0:
            raise ValueError("auxiliary function is identically zero")
        if not math.isclose(auxiliary.power, second_index):
            raise ValueError(
                f"|auxiliary| must vary with index {second_index}, got {auxiliary.power}")
    else:
        probe = 1e6 * max(valid_from, 1.0)
        slope = _measure_slope(auxiliary, probe)
        if not slope < 0 or abs(slope - second_index) > 0.05:
            raise ValueError(
                f"auxiliary does not vanish like t**{second_index} (measured slope {slope:.3g})")

    a, al, rho = float(scale), float(index), float(second_index)

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        return a * np.power(t, al) * (1.0 + auxiliary(t) / rho)

    def excess(t, x):
        # x^al * (A(tx) - A(t)) / rho / (1 + A(t)/rho)
        at = float(auxiliary(np.float64(t)))
        if isinstance(auxiliary, PowerFunction):
            diff = at * math.expm1(auxiliary.power * math.log(x))
        else:
            diff = float(auxiliary(np.float64(t * x))) - at
        return x ** al * diff / rho / (1.0 + at / rho)

    derivative = None
    if isinstance(auxiliary, PowerFunction):
        k, p = auxiliary.coef / rho, auxiliary.power

        def derivative(t):
            t = np.asarray(t, dtype=float)
            return a * (al * np.power(t, al - 1.0) + k * (al + p) * np.power(t, al + p - 1.0))

    return SecondOrderRVFunction(
        evaluate=evaluate, index=al, second_index=rho, auxiliary=auxiliary,
        derivative=derivative, scale=a, valid_from=valid_from, name=name, excess=excess,
    )


def pure_power(index: float, scale: float = 1.0, auxiliary: Func = ZERO,
               second_index: float = -1.0, valid_from: float = 1.0) -> SecondOrderRVFunction:
    """``scale * t**index`` wrapped as an RV function."""
    a, al = float(scale), float(index)
    return SecondOrderRVFunction(
        evaluate=lambda t: a * np.power(np.asarray(t, dtype=float), al),
        derivative=lambda t: a * al * np.power(np.asarray(t, dtype=float), al - 1.0),
        index=al, second_index=second_index, auxiliary=auxiliary, scale=a,
        valid_from=valid_from, name=f"t^{al:g}",
    )


def rv_product(f: SecondOrderRVFunction, g: SecondOrderRVFunction) -> SecondOrderRVFunction:
    """Pointwise product; indices add and the second index is the larger one.

    The auxiliary of the product is ``rho * (A_f/rho_f + A_g/rho_g)``, which
    is what multiplying two Hua-Joe forms gives to first order.
    """
    rho = max(f.second_index, g.second_index)

    def aux(t):
        total = np.zeros_like(np.asarray(t, dtype=float))
        for h in (f, g):
            if h.second_index != 0:
                total = total + h.auxiliary(t) / h.second_index
        return rho * total if rho != 0 else total

    derivative = None
    if f.derivative is not None and g.derivative is not None:
        def derivative(t):
            return f.derivative(t) * g.evaluate(t) + f.evaluate(t) * g.derivative(t)

    return SecondOrderRVFunction(
        evaluate=lambda t: f.evaluate(t) * g.evaluate(t),
        index=f.index + g.index, second_index=rho, auxiliary=aux,
        derivative=derivative, scale=f.scale * g.scale,
        valid_from=max(f.valid_from, g.valid_from),
        name=f"({f.name})*({g.name})",
    )


def second_order_ratio(f: SecondOrderRVFunction, t: float, x: float) -> float:
    """``(f(tx)/f(t) - x**index) / A(t)``."""
    if min(t, t * x) < f.valid_from:
        raise ValueError(f"t={t:g}, tx={t * x:g} must be >= valid_from={f.valid_from:g}")
    a = float(f.auxiliary(np.float64(t)))
    if a == 0.0:
        raise ZeroDivisionError(f"auxiliary function vanishes at t={t:g}")
    return ratio_excess(f, t, x) / a


def ratio_excess(f: SecondOrderRVFunction, t: float, x: float) -> float:
    """``f(tx)/f(t) - x**index``, cancellation-free when ``f.excess`` is known."""
    if f.excess is not None:
        return float(f.excess(t, x))
    ratio = float(f.evaluate(np.float64(t * x))) / float(f.evaluate(np.float64(t)))
    return ratio - x ** f.index


def karamata_index_estimate(
    f: Func,
    t0: float,
    t: float,
    side: Literal["head", "tail"] = "head",
    rel_tol: float = 1e-12,
) -> float:
    """Karamata ratio ``t f(t) / integral``.

    ``head`` integrates over [t0, t] and tends to index + 1; ``tail``
    integrates over [t, inf) and tends to -index - 1. A divergent tail
    integral surfaces as :class:`~lighttail.quadrature.QuadratureError`.
    """
    ft = float(np.asarray(f(np.array([t], dtype=float)))[0])
    if side == "head":
        integral = quad(f, t0, t, rel_tol=rel_tol).value
    elif side == "tail":
        integral = quad(f, t, math.inf, rel_tol=rel_tol, max_panels=2000).value
    else:
        raise ValueError(f"side must be 'head' or 'tail', got {side!r}")
    return t * ft / integral


@dataclass(frozen=True)
class DreesViolation:
    t: float
    x: float
    order: Literal["first", "second"]
    lhs: float
    bound: float


@dataclass
class DreesReport:
    violations: list[DreesViolation] = field(default_factory=list)
    threshold: float = 0.0  # no violation at any grid t strictly above this

    @property
    def ok(self) -> bool:
        return not self.violations


def drees_bound_check(
    f: SecondOrderRVFunction,
    grid: Iterable[tuple[float, float]],
    eps: float,
    delta: float,
) -> DreesReport:
    """Check the uniform first- and second-order bounds pointwise on ``grid``.

    First order: ``|f(tx)/f(t) - x^a| <= eps x^a max(x^d, x^-d)``.
    Second order: ``|ratio_term - x^a (x^r - 1)/r| <= eps x^(a+r) max(x^d, x^-d)``,
    skipped where the auxiliary function is zero (exact powers).
    """
    report = DreesReport()
    al, rho = f.index, f.second_index
    worst_t = 0.0
    for t, x in grid:
        if min(t, t * x) < f.valid_from:
            raise ValueError(f"grid point ({t:g}, {x:g}) lies below valid_from")
        spread = max(x ** delta, x ** -delta)
        ex = ratio_excess(f, t, x)
        lhs1 = abs(ex)
        bound1 = eps * x ** al * spread
        if lhs1 > bound1:
            report.violations.append(DreesViolation(t, x, "first", lhs1, bound1))
            worst_t = max(worst_t, t)
        a = float(f.auxiliary(np.float64(t)))
        if a != 0.0:
            lhs2 = abs(ex / a - second_order_limit(al, rho, x))
            bound2 = eps * x ** (al + rho) * spread
            if lhs2 > bound2:
                report.violations.append(DreesViolation(t, x, "second", lhs2, bound2))
                worst_t = max(worst_t, t)
    report.threshold = worst_t
    return report


def geometric_grid(t_lo: float, t_hi: float, x_lo: float, x_hi: float,
                   nt: int = 7, nx: int = 7) -> list[tuple[float, float]]:
    """Cartesian (t, x) grid, geometric in both coordinates."""
    return [(float(t), float(x)) for t in np.geomspace(t_lo, t_hi, nt)
            for x in np.geomspace(x_lo, x_hi, nx)]
