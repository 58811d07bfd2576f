"""Light-tailed distributions on [0, inf) of exponential rate ``alpha``.

Three kinds are supported:

* ``WEIBULL``  -- survival ``exp(-alpha t + chi(t))`` with chi in RV_rho, 0 < rho < 1;
* ``TILTED``   -- survival ``b(t) exp(-alpha t)`` with b regularly varying;
* ``GAMMA``    -- integer-shape Gamma (Erlang), whose tilt ``e^{alpha t} G(t)``
  is a polynomial of degree shape - 1.

Tail formulas are only prescribed beyond a join point; below it the
log-survival is filled in by a :class:`PatchSpec` so that every model is a
genuine distribution with a continuous density.

Models are addressed from the command line by strings of the form
``family:key=value,...``::

    weibull:rate=1,rho=0.5[,scale=1,rho1=-2,k=-1/rho1,join=auto]
        chi(t) = scale * t**rho * (1 + k * t**rho1)
    tilted:rate=1,beta=-3[,rho2=-4,scale=1,k=-1/rho2,join=1]
        b(t) = scale * t**beta * (1 + k * t**rho2)
    shifted:rate=1,index=-1.5
        c(t) = (1 + t)**index                  (no patch needed)
    logshifted:rate=1[,power=2]
        c(t) = (1 + t/e)**-1 * log(e + t)**-power
    gamma:shape=2,rate=1
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .quadrature import log_quad, quad
from .rv import PowerFunction, SecondOrderRVFunction, ZERO, hua_joe_construct

__all__ = [
    "ModelKind",
    "BranchLabel",
    "MomentFlags",
    "PatchSpec",
    "LightTailModel",
    "ModelSpecError",
    "HypothesisError",
    "parse_model",
    "weibull_model",
    "tilted_model",
    "shifted_model",
    "logshifted_model",
    "gamma_model",
    "exp_moment",
    "truncated_exp_moment",
    "first_exp_moment",
    "classify_branch",
    "CATALOG",
]

QUAD_TOL = 1e-12


class ModelKind(enum.Enum):
    WEIBULL = "WeibullType"
    TILTED = "TiltedRV"
    GAMMA = "Gamma"


class BranchLabel(enum.Enum):
    """Case of the tail integral expansion selected by the factor's index."""

    G_MINUS1_INF = "index = -1, infinite exponential moment"
    G_MINUS1_FIN = "index = -1, finite exponential moment"
    G_BETWEEN_M2_M1 = "-2 < index < -1"
    G_MINUS2_INF = "index = -2, infinite first moment of the factor"
    G_LE_MINUS2_FIN = "index <= -2, finite first moment of the factor"
    G_GT_MINUS1 = "index > -1"


class ModelSpecError(ValueError):
    """A model string does not follow ``family:key=value,...``."""


class HypothesisError(ValueError):
    """An asymptotic result was asked for outside its hypotheses."""


@dataclass(frozen=True)
class MomentFlags:
    exp_moment_finite: bool
    first_exp_moment_finite: bool


@dataclass(frozen=True)
class PatchSpec:
    """Body of the distribution on [0, join_point].

    The hazard rate on the body blends towards the tail hazard ``H`` at the
    join: ``h(t) = H + (h0 - H) * (1 - t/join)**r``. ``h0`` and ``r`` are chosen
    so the body integrates to the tail's log-survival at the join, which makes
    the log-survival and its derivative continuous there. ``h >= 0``
    throughout and ``h > 0`` on (0, join], so survival strictly decreases.
    """

    join_point: float
    join_log_survival: float
    join_hazard: float
    h0: float = field(init=False)
    r: float = field(init=False)

    def __post_init__(self):
        j, ls, hz = self.join_point, self.join_log_survival, self.join_hazard
        if j <= 0:
            raise ValueError("join_point must be positive")
        if not ls < 0:
            raise ValueError(f"tail log-survival at the join ({ls:.4g}) must be negative")
        if not hz > 0:
            raise ValueError(f"tail hazard at the join ({hz:.4g}) must be positive")
        mean = -ls / j
        if mean >= hz:
            r, h0 = 1.0, 2.0 * mean - hz
        else:
            r, h0 = mean / (hz - mean), 0.0
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "r", r)

    def body_log_survival(self, t):
        j, H, h0, r = self.join_point, self.join_hazard, self.h0, self.r
        t = np.asarray(t, dtype=float)
        x = np.clip(t / j, 0.0, 1.0)
        # -log S = h0 j g(x) + H j d(x), g = int_0^x (1-s)^r ds, d = x - g; both
        # terms are nonnegative and increasing, so no cancellation near t = 0
        with np.errstate(divide="ignore"):
            g = -np.expm1((r + 1.0) * np.log1p(-x)) / (r + 1.0)
        series = r * x ** 2 / 2 * (1 - (r - 1) * x / 3 + (r - 1) * (r - 2) * x ** 2 / 12)
        d = np.where(x < 1e-4, series, x - g)
        return -(h0 * j * g + H * j * d)

    def body_hazard(self, t):
        j, H, h0, r = self.join_point, self.join_hazard, self.h0, self.r
        w = np.clip(1.0 - np.asarray(t, dtype=float) / j, 0.0, 1.0)
        return H + (h0 - H) * w ** r


def _out(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


@dataclass(frozen=True)
class LightTailModel:
    """A distribution of one of the three kinds, with a body patch if needed.

    ``factor`` is chi for WEIBULL and the tilt b (or c) otherwise. For
    GAMMA the factor is the exact Erlang polynomial. ``join`` is 0 when the
    tail formula is a valid distribution on all of [0, inf).
    """

    kind: ModelKind
    rate: float
    factor: SecondOrderRVFunction
    log_tail_survival: Callable[[np.ndarray], np.ndarray]
    tail_hazard: Callable[[np.ndarray], np.ndarray]
    moment_flags: MomentFlags
    patch: Optional[PatchSpec] = None
    shape: Optional[int] = None
    spec: str = ""

    @property
    def join(self) -> float:
        return self.patch.join_point if self.patch is not None else 0.0

    @property
    def index(self) -> float:
        return self.factor.index

    # -- pointwise accessors -------------------------------------------------

    def log_survival(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("survival is defined for t >= 0")
        if self.patch is None:
            return _out(self.log_tail_survival(t))
        j = self.patch.join_point
        tail_t = np.maximum(t, j)
        out = np.where(t >= j, self.log_tail_survival(tail_t), self.patch.body_log_survival(t))
        return _out(out)

    def survival(self, t):
        return _out(np.exp(self.log_survival(t)))

    def hazard(self, t):
        t = np.asarray(t, dtype=float)
        if self.patch is None:
            return _out(self.tail_hazard(t))
        j = self.patch.join_point
        out = np.where(t >= j, self.tail_hazard(np.maximum(t, j)), self.patch.body_hazard(t))
        return _out(out)

    def log_density(self, t):
        with np.errstate(divide="ignore"):
            return _out(self.log_survival(t) + np.log(self.hazard(t)))

    def density(self, t):
        return _out(np.exp(self.log_density(t)))

    def log_tilt(self, t):
        """log of ``e^{rate t} * survival(t)``, the function b or c."""
        return _out(self.log_survival(t) + self.rate * np.asarray(t, dtype=float))

    def tilt(self, t):
        return _out(np.exp(self.log_tilt(t)))

    def split_hint(self, t: float) -> Optional[float]:
        """``1/chi'(t)`` for Weibull-type models, else None."""
        if self.kind is not ModelKind.WEIBULL or self.factor.derivative is None:
            return None
        d = float(self.factor.derivative(np.float64(t)))
        return 1.0 / d if d > 0 else None

    # -- integrals of the tilt ----------------------------------------------

    def tilt_integral(self, a: float, b: float, rel_tol: float = 1e-10) -> float:
        """Integral of the tilt over [a, b]; ``b`` may be ``inf``."""
        if b == math.inf:
            return self.tilt_tail_integral(a, rel_tol)
        pts = [self.join] if a < self.join < b else []
        return quad(self.tilt, a, b, rel_tol=rel_tol, points=pts).value

    def tilt_tail_integral(self, a: float, rel_tol: float = 1e-10) -> float:
        """Integral of the tilt over [a, inf); closed form where available."""
        closed = self.factor.tail_integral
        if closed is not None and self.kind is not ModelKind.WEIBULL:
            if a >= self.join:
                return float(closed(a))
            return quad(self.tilt, a, self.join, rel_tol=rel_tol).value + float(closed(self.join))
        pts = [self.join] if a < self.join else []
        return quad(self.tilt, a, math.inf, rel_tol=rel_tol, points=pts,
                    max_panels=20000).value


# -- construction --------------------------------------------------------------


def _check_tail(log_tail, hazard, join: float, t_max: float = 1e8) -> Optional[str]:
    grid = np.geomspace(max(join, 1e-9), t_max, 400)
    hz = np.asarray(hazard(grid))
    if not np.all(hz > 0):
        return f"tail hazard is not positive at t={grid[~(hz > 0)][0]:.4g}"
    if join > 0 and not float(log_tail(np.float64(join))) < 0:
        return f"tail log-survival at the join t={join:g} is not negative"
    return None


def _auto_join(log_tail, hazard, start: float, extra: Optional[Callable[[float], Optional[str]]] = None):
    j = start
    last = None
    for _ in range(40):
        last = _check_tail(log_tail, hazard, j) or (extra(j) if extra else None)
        if last is None:
            return j
        j *= 2.0
    raise ValueError(f"no admissible join point found: {last}")


def weibull_model(rate: float, rho: float, *, scale: float = 1.0, rho1: float = -2.0,
                  k: Optional[float] = None, join: Optional[float] = None,
                  spec: str = "") -> LightTailModel:
    """Survival ``exp(-rate t + chi(t))``, chi = scale t^rho (1 + k t^rho1).

    With ``join=None`` the smallest power of two is used beyond which the
    tail is a valid survival function with nonincreasing chi'.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    if not 0 < rho < 1:
        raise ValueError("Weibull-type models need 0 < rho < 1")
    if k is None:
        k = -1.0 / rho1
    if k == 0:
        a, r = float(scale), float(rho)
        chi = SecondOrderRVFunction(
            evaluate=lambda t: a * np.power(np.asarray(t, dtype=float), r),
            derivative=lambda t: a * r * np.power(np.asarray(t, dtype=float), r - 1.0),
            index=r, second_index=float(rho1), scale=a, name="chi")
    else:
        chi = hua_joe_construct(scale, rho, rho1, PowerFunction(rho1 * k, rho1), name="chi")

    def log_tail(t):
        return -rate * t + chi.evaluate(t)

    def hazard(t):
        return rate - chi.derivative(t)

    def chi_prime_monotone(j: float) -> Optional[str]:
        grid = np.geomspace(j, 1e8, 400)
        if np.any(np.diff(chi.derivative(grid)) > 1e-15):
            return "chi' is not nonincreasing beyond the join"
        return None

    if join is None:
        join = _auto_join(log_tail, hazard, 1.0, chi_prime_monotone)
    else:
        problem = _check_tail(log_tail, hazard, join)
        if problem:
            raise ValueError(problem)
    chi = replace(chi, valid_from=join)
    patch = PatchSpec(join, float(log_tail(np.float64(join))), float(hazard(np.float64(join))))
    return LightTailModel(
        kind=ModelKind.WEIBULL, rate=float(rate), factor=chi,
        log_tail_survival=log_tail, tail_hazard=hazard,
        moment_flags=MomentFlags(False, False), patch=patch,
        spec=spec or f"weibull:rate={rate:g},rho={rho:g},scale={scale:g},rho1={rho1:g},k={k:g},join={join:g}",
    )


def _tilted_from_factor(rate: float, factor: SecondOrderRVFunction, flags: MomentFlags,
                        join: float, spec: str) -> LightTailModel:
    if rate <= 0:
        raise ValueError("rate must be positive")
    if factor.derivative is None:
        raise ValueError("tilted models need the factor's derivative for the density")

    def log_tail(t):
        return -rate * t + np.log(factor.evaluate(t))

    def hazard(t):
        return rate - factor.derivative(t) / factor.evaluate(t)

    if join > 0:
        problem = _check_tail(log_tail, hazard, join)
        if problem:
            raise ValueError(problem)
        patch = PatchSpec(join, float(log_tail(np.float64(join))), float(hazard(np.float64(join))))
    else:
        problem = _check_tail(log_tail, hazard, 0.0)
        if problem:
            raise ValueError(problem)
        if abs(float(log_tail(np.float64(0.0)))) > 1e-14:
            raise ValueError("without a patch the factor must equal 1 at t = 0")
        patch = None
    return LightTailModel(
        kind=ModelKind.TILTED, rate=float(rate), factor=factor,
        log_tail_survival=log_tail, tail_hazard=hazard, moment_flags=flags,
        patch=patch, spec=spec,
    )


def tilted_model(rate: float, beta: float, *, rho2: float = -4.0, scale: float = 1.0,
                 k: Optional[float] = None, join: float = 1.0, spec: str = "") -> LightTailModel:
    """Survival ``b(t) exp(-rate t)`` with b = scale t^beta (1 + k t^rho2).

    The default ``k = -1/rho2`` gives auxiliary function ``-t**rho2``; with
    ``beta=-3, rho2=-4`` this is b(t) = t^-3 (1 + t^-4/4).
    """
    if k is None:
        k = -1.0 / rho2
    if k == 0:
        raise ValueError("k = 0 gives an exact power; use a nonzero k")
    b = hua_joe_construct(scale, beta, rho2, PowerFunction(rho2 * k, rho2),
                          valid_from=join, name="b")
    if beta < -1:
        s, be, r = float(scale), float(beta), float(rho2)

        def tail_integral(a):
            return s * (a ** (be + 1) / (-be - 1) + k * a ** (be + r + 1) / (-be - r - 1))

        b = replace(b, tail_integral=tail_integral)
    flags = MomentFlags(beta < -1, beta < -2)
    spec = spec or f"tilted:rate={rate:g},beta={beta:g},rho2={rho2:g},scale={scale:g},k={k:g},join={join:g}"
    return _tilted_from_factor(rate, b, flags, join, spec)


def shifted_model(rate: float, index: float, spec: str = "") -> LightTailModel:
    """Tilt ``c(t) = (1 + t)**index``: 2RV(index, -1) with A(t) = -index/t."""
    g = float(index)
    aux = PowerFunction(-g, -1.0) if g != 0 else ZERO
    tail_integral = None
    if g < -1:
        def tail_integral(a):
            return (1.0 + a) ** (g + 1.0) / (-g - 1.0)
    c = SecondOrderRVFunction(
        evaluate=lambda t: np.power(1.0 + np.asarray(t, dtype=float), g),
        derivative=lambda t: g * np.power(1.0 + np.asarray(t, dtype=float), g - 1.0),
        index=g, second_index=-1.0, auxiliary=aux, scale=1.0, valid_from=1.0,
        tail_integral=tail_integral, name=f"(1+t)^{g:g}",
    )
    flags = MomentFlags(g < -1, g < -2)
    return _tilted_from_factor(rate, c, flags, 0.0, spec or f"shifted:rate={rate:g},index={g:g}")


def logshifted_model(rate: float, power: float = 2.0, spec: str = "") -> LightTailModel:
    """Tilt ``c(t) = (1 + t/e)**-1 * log(e + t)**-power``.

    Index -1 with a slowly varying log correction: second-order index 0 and
    auxiliary ``-power/log t``. The exponential moment at ``rate`` is finite
    iff ``power > 1``.
    """
    p = float(power)
    e = math.e

    def c(t):
        t = np.asarray(t, dtype=float)
        return e / (e + t) * np.log(e + t) ** -p

    def dc(t):
        t = np.asarray(t, dtype=float)
        lg = np.log(e + t)
        return -e / (e + t) ** 2 * lg ** -p * (1.0 + p / lg)

    tail_integral = None
    if p > 1:
        def tail_integral(a):
            return e / ((p - 1.0) * math.log(e + a) ** (p - 1.0))

    factor = SecondOrderRVFunction(
        evaluate=c, derivative=dc, index=-1.0, second_index=0.0,
        auxiliary=lambda t: -p / np.log(np.asarray(t, dtype=float)),
        scale=e, valid_from=2.0, tail_integral=tail_integral,
        name=f"log-corrected 1/t (power {p:g})",
    )
    flags = MomentFlags(p > 1, False)
    return _tilted_from_factor(rate, factor, flags, 0.0, spec or f"logshifted:rate={rate:g},power={p:g}")


def gamma_model(shape: int, rate: float, spec: str = "") -> LightTailModel:
    """Erlang(shape, rate); tilt c(t) = sum_{k<shape} (rate t)^k / k!."""
    if int(shape) != shape or shape < 1:
        raise ValueError("Gamma shape must be an integer >= 1")
    if rate <= 0:
        raise ValueError("rate must be positive")
    z, al = int(shape), float(rate)
    ks = np.arange(z, dtype=float)
    lfact = np.array([math.lgamma(k + 1.0) for k in ks])

    def log_poly(t, n_terms):
        t = np.asarray(t, dtype=float)
        pos = (t > 0)[..., None]
        lt = np.log(al * np.where(t > 0, t, 1.0))[..., None]
        terms = ks[:n_terms] * lt - lfact[:n_terms]
        terms = np.where(pos | (ks[:n_terms] == 0), terms, -np.inf)
        return np.logaddexp.reduce(terms, axis=-1)

    def log_poly_power(t, k):
        if k == 0:
            return np.zeros_like(t)
        with np.errstate(divide="ignore"):
            return k * np.log(al * t)

    def c(t):
        return np.exp(log_poly(t, z))

    def dc(t):
        if z == 1:
            return np.zeros_like(np.asarray(t, dtype=float))
        return al * np.exp(log_poly(t, z - 1))

    def log_tail(t):
        # log(1 + t + ...) - t cancels for tiny t; clamp the rounding residue
        return np.minimum(log_poly(t, z) - al * np.asarray(t, dtype=float), 0.0)

    def hazard(t):
        t = np.asarray(t, dtype=float)
        log_dens = math.log(al) + log_poly_power(t, z - 1) - math.lgamma(z) - al * t
        return np.exp(log_dens - log_tail(t))

    aux = PowerFunction(-(z - 1) / al, -1.0) if z > 1 else ZERO
    factor = SecondOrderRVFunction(
        evaluate=c, derivative=dc, index=float(z - 1), second_index=-1.0,
        auxiliary=aux, scale=al ** (z - 1) / math.gamma(z), valid_from=1.0,
        name=f"Erlang({z}) polynomial",
    )
    return LightTailModel(
        kind=ModelKind.GAMMA, rate=al, factor=factor, log_tail_survival=log_tail,
        tail_hazard=hazard, moment_flags=MomentFlags(False, False), shape=z,
        spec=spec or f"gamma:shape={z},rate={al:g}",
    )


# -- model strings ---------------------------------------------------------------

_FAMILIES = {
    "weibull": ({"rate", "rho"}, {"scale", "rho1", "k", "join"}),
    "tilted": ({"rate", "beta"}, {"rho2", "scale", "k", "join"}),
    "shifted": ({"rate", "index"}, set()),
    "logshifted": ({"rate"}, {"power"}),
    "gamma": ({"shape", "rate"}, set()),
}

_PAIR = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*([^,]*)")


def parse_model(text: str) -> LightTailModel:
    """Build a model from ``family:key=value,...``; see the module docstring."""
    family, sep, rest = text.partition(":")
    family = family.strip().lower()
    if family not in _FAMILIES:
        raise ModelSpecError(f"unknown model family {family!r} at position 0 in {text!r}; "
                             f"expected one of {sorted(_FAMILIES)}")
    if not sep:
        raise ModelSpecError(f"missing ':' after family at position {len(text)} in {text!r}")
    required, optional = _FAMILIES[family]
    params: dict[str, float] = {}
    pos = len(family) + 1
    for chunk in rest.split(","):
        m = _PAIR.fullmatch(chunk)
        if not m:
            raise ModelSpecError(f"expected key=value at position {pos} in {text!r}")
        key, raw = m.group(1).lower(), m.group(2).strip()
        if key not in required | optional:
            raise ModelSpecError(f"unknown key {key!r} for {family} at position {pos} in {text!r}")
        if key in params:
            raise ModelSpecError(f"duplicate key {key!r} at position {pos} in {text!r}")
        try:
            params[key] = float(raw)
        except ValueError:
            raise ModelSpecError(
                f"invalid number {raw!r} for {key!r} at position {pos + m.start(2)} in {text!r}"
            ) from None
        pos += len(chunk) + 1
    missing = required - params.keys()
    if missing:
        raise ModelSpecError(f"missing keys {sorted(missing)} for {family} in {text!r}")
    spec = text.strip()
    try:
        if family == "weibull":
            return weibull_model(params["rate"], params["rho"], scale=params.get("scale", 1.0),
                                 rho1=params.get("rho1", -2.0), k=params.get("k"),
                                 join=params.get("join"), spec=spec)
        if family == "tilted":
            return tilted_model(params["rate"], params["beta"], rho2=params.get("rho2", -4.0),
                                scale=params.get("scale", 1.0), k=params.get("k"),
                                join=params.get("join", 1.0), spec=spec)
        if family == "shifted":
            return shifted_model(params["rate"], params["index"], spec=spec)
        if family == "logshifted":
            return logshifted_model(params["rate"], params.get("power", 2.0), spec=spec)
        shape = params["shape"]
        if shape != int(shape):
            raise ModelSpecError(f"gamma shape must be an integer in {text!r}")
        return gamma_model(int(shape), params["rate"], spec=spec)
    except ModelSpecError:
        raise
    except ValueError as exc:
        raise ModelSpecError(f"{text!r}: {exc}") from None


# Named instances used by the acceptance suite and documentation.
CATALOG = {
    "weibull_root": "weibull:rate=1,rho=0.5,rho1=-2,k=0.5",
    "tilted_cubic": "tilted:rate=1,beta=-3,rho2=-4",
    "gamma2": "gamma:shape=2,rate=1",
    "gamma1": "gamma:shape=1,rate=1",
    "c_minus1": "shifted:rate=1,index=-1",
    "c_minus1_log": "logshifted:rate=1,power=2",
    "c_minus1.5": "shifted:rate=1,index=-1.5",
    "c_minus2": "shifted:rate=1,index=-2",
    "c_minus3": "shifted:rate=1,index=-3",
}


# -- moment functionals --------------------------------------------------------------


def _check_theta(m: LightTailModel, theta: Optional[float]) -> float:
    theta = m.rate if theta is None else float(theta)
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    if theta > m.rate:
        raise ValueError(f"theta={theta:g} exceeds the rate {m.rate:g}; the integral diverges")
    return theta


def _breaks(m: LightTailModel) -> list[float]:
    return [m.join] if m.join > 0 else []


def exp_moment(m: LightTailModel, theta: Optional[float] = None, rel_tol: float = QUAD_TOL) -> float:
    """``int e^{theta u} dF(u)``; ``math.inf`` when known to diverge.

    At ``theta = rate`` finiteness comes from the model's declared flags, never
    from quadrature.
    """
    theta = _check_theta(m, theta)
    at_rate = theta == m.rate
    if at_rate and not m.moment_flags.exp_moment_finite:
        return math.inf
    closed = m.factor.tail_integral
    if at_rate and closed is not None:
        # split off [T, inf): int (rate c - c') = rate * int c + c(T)
        cut = max(m.join, 1.0)
        head = log_quad(lambda u: theta * u + m.log_density(u), 0.0, cut,
                        rel_tol=rel_tol, points=_breaks(m))
        return math.exp(head.log_value) + m.rate * m.tilt_tail_integral(cut) + m.tilt(cut)
    res = log_quad(lambda u: theta * u + m.log_density(u), 0.0, math.inf,
                   rel_tol=rel_tol, points=_breaks(m), max_panels=20000)
    return math.exp(res.log_value)


def first_exp_moment(m: LightTailModel, theta: Optional[float] = None,
                     rel_tol: float = QUAD_TOL) -> float:
    """``int u e^{theta u} dF(u)``; ``math.inf`` when known to diverge."""
    theta = _check_theta(m, theta)
    if theta == m.rate and not m.moment_flags.first_exp_moment_finite:
        return math.inf

    def logf(u):
        with np.errstate(divide="ignore"):
            return np.log(u) + theta * u + m.log_density(u)

    res = log_quad(logf, 0.0, math.inf, rel_tol=rel_tol, points=_breaks(m), max_panels=20000)
    return math.exp(res.log_value)


def truncated_exp_moment(m: LightTailModel, t: float, theta: Optional[float] = None,
                         method: str = "identity", rel_tol: float = QUAD_TOL) -> float:
    """``int_0^t e^{theta u} dF(u)``.

    ``identity`` integrates by parts, ``1 - e^{theta t} S(t) + theta int_0^t e^{theta u} S(u) du``;
    ``direct`` integrates the tilted density.
    """
    theta = _check_theta(m, theta)
    if t <= 0:
        return 0.0
    pts = [m.join] if 0 < m.join < t else []
    if method == "direct":
        res = log_quad(lambda u: theta * u + m.log_density(u), 0.0, t, rel_tol=rel_tol, points=pts)
        return math.exp(res.log_value)
    if method != "identity":
        raise ValueError(f"unknown method {method!r}")
    head = log_quad(lambda u: theta * u + m.log_survival(u), 0.0, t, rel_tol=rel_tol, points=pts)
    return 1.0 - math.exp(theta * t + m.log_survival(t)) + theta * math.exp(head.log_value)


def classify_branch(m: LightTailModel) -> BranchLabel:
    """Pick the expansion case from the factor's index and declared flags."""
    if m.kind is ModelKind.WEIBULL:
        raise HypothesisError("Theorem 4 requires tilted-RV factors; got a Weibull-type model")
    g = m.factor.index
    flags = m.moment_flags
    if g > -1:
        return BranchLabel.G_GT_MINUS1
    if g == -1:
        return BranchLabel.G_MINUS1_FIN if flags.exp_moment_finite else BranchLabel.G_MINUS1_INF
    if g > -2:
        return BranchLabel.G_BETWEEN_M2_M1
    if g == -2 and not flags.first_exp_moment_finite:
        return BranchLabel.G_MINUS2_INF
    return BranchLabel.G_LE_MINUS2_FIN
