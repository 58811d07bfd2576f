"""High-accuracy convolution tails ``P(X + Y > t)`` computed in log space.

The tail is split at ``u = t/2``::

    P(X+Y > t) = int_0^{t/2} F(t-u) dG(u) + int_0^{t/2} G(t-u) dF(u) + F(t/2) G(t/2)

where ``F``/``G`` denote survival functions. Each integrand is assembled as
``log_survival(t - u) + log_density(u)`` and integrated by the log-space
Gauss-Kronrod rule, so ``e^{-alpha t}`` never has to be represented.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .models import LightTailModel
from .quadrature import LogQuadResult, QuadratureError, log_quad, logsumexp

__all__ = ["ConvTailResult", "ToleranceNotMet", "conv_tail", "partial_conv_integral", "DEFAULT_REL_TOL"]

DEFAULT_REL_TOL = 1e-10
MIN_REL_TOL = 1e-12


@dataclass(frozen=True)
class ConvTailResult:
    log_value: float
    rel_error_estimate: float
    evaluations: int
    split_point: float
    converged: bool = True

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


class ToleranceNotMet(RuntimeError):
    def __init__(self, message: str, result: ConvTailResult):
        super().__init__(message)
        self.result = result


def _seeds(F: LightTailModel, G: LightTailModel, t: float) -> list[float]:
    half = 0.5 * t
    seeds = [0.25 * t, G.join, t - F.join]
    hint = F.split_hint(t)
    if hint is not None:
        seeds.append(hint)
    return sorted({s for s in seeds if 0.0 < s < half})


def _half_integral(F: LightTailModel, G: LightTailModel, t: float, rel_tol: float) -> LogQuadResult:
    """log of int_0^{t/2} F(t-u) dG(u)."""
    return log_quad(
        lambda u: F.log_survival(t - u) + G.log_density(u),
        0.0, 0.5 * t, rel_tol=rel_tol, points=_seeds(F, G, t),
        max_panels=20000, raise_on_failure=False,
    )


def _check_tol(rel_tol: float) -> None:
    if not rel_tol >= MIN_REL_TOL:
        raise ValueError(f"rel_tol must be >= {MIN_REL_TOL:g}, got {rel_tol:g}")


def partial_conv_integral(F: LightTailModel, G: LightTailModel, t: float,
                          rel_tol: float = DEFAULT_REL_TOL) -> float:
    """log of ``int_0^{t/2} F(t-u) dG(u)``; ``-inf`` at t = 0."""
    _check_tol(rel_tol)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return -math.inf
    res = _half_integral(F, G, t, rel_tol)
    if not res.converged:
        raise QuadratureError(
            f"partial convolution integral at t={t:g} reached relative error "
            f"{res.rel_error:.3g} against {rel_tol:g}", res.log_value, res.rel_error)
    return res.log_value


def conv_tail(F: LightTailModel, G: LightTailModel, t: float,
              rel_tol: float = DEFAULT_REL_TOL, strict: bool = True) -> ConvTailResult:
    """log ``P(X + Y > t)`` for independent X ~ F, Y ~ G.

    With ``strict`` a missed tolerance raises :class:`ToleranceNotMet` carrying
    the best estimate; otherwise the result comes back with ``converged=False``.
    """
    _check_tol(rel_tol)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return ConvTailResult(0.0, 0.0, 0, 0.0)
    if F.rate <= 0 or G.rate <= 0:
        raise ValueError("models need positive rates")
    # each piece gets a third of the budget
    piece_tol = rel_tol / 3.0
    left = _half_integral(F, G, t, piece_tol)
    right = _half_integral(G, F, t, piece_tol)
    corner = F.log_survival(0.5 * t) + G.log_survival(0.5 * t)
    # order the two integrals canonically so (F, G) and (G, F) sum identically
    pieces = sorted([(left.log_value, left.rel_error), (right.log_value, right.rel_error)])
    log_total = logsumexp([pieces[0][0], pieces[1][0], corner])
    abs_err = logsumexp([lv + math.log(re) for lv, re in pieces if re > 0 and lv > -math.inf])
    rel = math.exp(abs_err - log_total) if abs_err > -math.inf else 0.0
    result = ConvTailResult(
        log_value=min(log_total, 0.0),
        rel_error_estimate=rel,
        evaluations=left.evaluations + right.evaluations,
        split_point=0.5 * t,
        converged=left.converged and right.converged and rel <= rel_tol,
    )
    if strict and not result.converged:
        raise ToleranceNotMet(
            f"convolution tail at t={t:g}: relative error {rel:.3g} exceeds {rel_tol:g}", result)
    return result
