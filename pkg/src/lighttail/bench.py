"""Oracle-vs-expansion convergence sweeps, CSV tables and empirical rate fits.

Config files are INI-style with four sections; every key can also be given
as a command-line flag, which wins over the file::

    [models]
    f = gamma:shape=2,rate=1
    g = gamma:shape=2,rate=1      ; optional, defaults to f
    theorem = auto                ; auto | thm1 | thm4

    [grid]
    t_min = 20
    t_max = 160
    points = 4

    [tolerances]
    rel_tol = 1e-10

    [output]
    out = sweep.csv               ; '-' or empty for standard output
    plot = sweep.dat              ; optional (log t, log rel_err2) pairs
    jobs = 1
"""

from __future__ import annotations

import configparser
import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .expansion import ExpansionResult, thm1_predict, thm4_predict
from .models import CATALOG, LightTailModel, ModelKind, parse_model
from .oracle import DEFAULT_REL_TOL, conv_tail

__all__ = [
    "CSV_HEADER",
    "THEOREMS",
    "SweepRecord",
    "RateFit",
    "SweepConfig",
    "resolve_model",
    "predict",
    "load_config",
    "run_sweep",
    "write_csv",
    "read_csv",
    "write_plot_data",
    "fit_rate",
    "make_config",
    "records_to_text",
]

CSV_HEADER = ("t", "oracle_log", "pred1_log", "pred2_log", "rel_err1", "rel_err2", "branch")
THEOREMS = ("auto", "thm1", "thm4")


@dataclass(frozen=True)
class SweepRecord:
    t: float
    oracle_log: float
    pred1_log: float
    pred2_log: float
    rel_err1: float
    rel_err2: float
    branch: str


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int
    note: str = ""


@dataclass(frozen=True)
class SweepConfig:
    f: str
    g: Optional[str] = None
    theorem: str = "auto"
    t_min: float = 20.0
    t_max: float = 160.0
    points: int = 4
    rel_tol: float = DEFAULT_REL_TOL
    jobs: int = 1
    out: Optional[str] = None
    plot: Optional[str] = None

    def grid(self) -> list[float]:
        if self.points < 1:
            raise ValueError("points must be >= 1")
        if not 0 < self.t_min <= self.t_max:
            raise ValueError(f"need 0 < t_min <= t_max, got {self.t_min}, {self.t_max}")
        if self.points == 1 or self.t_min == self.t_max:
            return [float(self.t_min)]
        # rounded to 12 digits so nominal points such as 40 print as 40
        return [float("%.12g" % t) for t in np.geomspace(self.t_min, self.t_max, self.points)]


def resolve_model(text: str) -> LightTailModel:
    """Parse a model spec, also accepting catalog names such as ``gamma2``."""
    return parse_model(CATALOG.get(text.strip(), text))


def predict(theorem: str, F: LightTailModel, G: LightTailModel, t: float) -> ExpansionResult:
    """Dispatch to the Weibull self-convolution or the tilted-tail expansion."""
    if theorem == "auto":
        theorem = "thm1" if F.kind is ModelKind.WEIBULL and G.kind is ModelKind.WEIBULL else "thm4"
    if theorem == "thm1":
        if G.spec != F.spec:
            raise ValueError("the Weibull expansion covers F*F only; give the same model for f and g")
        return thm1_predict(F, t)
    if theorem == "thm4":
        return thm4_predict(F, G, t)
    raise ValueError(f"unknown theorem {theorem!r}; choose from {', '.join(THEOREMS)}")


def _rel_err(pred_log: float, oracle_log: float) -> float:
    return abs(math.expm1(pred_log - oracle_log)) if math.isfinite(pred_log) else math.nan


def _evaluate_point(args: tuple[str, str, str, float, float]) -> SweepRecord:
    f_spec, g_spec, theorem, t, rel_tol = args
    F, G = resolve_model(f_spec), resolve_model(g_spec)
    res = predict(theorem, F, G, t)
    oracle_log = conv_tail(F, G, t, rel_tol=rel_tol).log_value
    p1, p2 = res.first_order_log_tail, res.predicted_log_tail
    return SweepRecord(t, oracle_log, p1, p2, _rel_err(p1, oracle_log), _rel_err(p2, oracle_log), res.branch)


def run_sweep(config: SweepConfig) -> list[SweepRecord]:
    """Evaluate oracle and predictions on the geometric t-grid.

    Models and the expansion's preconditions are validated up front, so
    grammar errors and hypothesis rejections surface before any work is
    scheduled. Rows come back in grid order whatever ``jobs`` is.
    """
    g_spec = config.g or config.f
    F, G = resolve_model(config.f), resolve_model(g_spec)
    grid = config.grid()
    predict(config.theorem, F, G, grid[0])
    tasks = [(config.f, g_spec, config.theorem, t, config.rel_tol) for t in grid]
    if config.jobs <= 1 or len(tasks) == 1:
        return [_evaluate_point(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=config.jobs) as pool:
        return list(pool.map(_evaluate_point, tasks))


def _fmt(x) -> str:
    return x if isinstance(x, str) else "%.17g" % x


def write_csv(records: Iterable[SweepRecord], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([_fmt(getattr(r, name)) for name in CSV_HEADER])


def read_csv(stream: TextIO) -> list[SweepRecord]:
    reader = csv.reader(stream)
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}; expected {','.join(CSV_HEADER)}")
    out = []
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"line {lineno}: expected {len(CSV_HEADER)} fields, got {len(row)}")
        out.append(SweepRecord(*(float(v) for v in row[:-1]), row[-1]))
    return out


def write_plot_data(records: Iterable[SweepRecord], stream: TextIO, column: str = "rel_err2") -> None:
    """Two whitespace-separated columns: log t and log of ``column``."""
    for r in records:
        err = getattr(r, column)
        if err > 0 and math.isfinite(err):
            stream.write("%.17g %.17g\n" % (math.log(r.t), math.log(err)))


def fit_rate(records: Sequence[SweepRecord] | Sequence[tuple[float, float]], column: str = "rel_err2") -> RateFit:
    """Least-squares slope of log error against log t.

    ``records`` may be sweep records or plain ``(t, error)`` pairs. Zero
    errors (an exact coincidence) are dropped and mentioned in ``note``.
    """
    pairs = [(r.t, getattr(r, column)) if isinstance(r, SweepRecord) else (float(r[0]), float(r[1]))
             for r in records]
    used = [(t, e) for t, e in pairs if e > 0 and math.isfinite(e) and t > 0]
    dropped = len(pairs) - len(used)
    if len(used) < 3:
        raise ValueError(f"need at least 3 positive error values to fit a rate, got {len(used)}")
    x = np.log([t for t, _ in used])
    y = np.log([e for _, e in used])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    note = f"{dropped} zero or non-finite error value(s) excluded" if dropped else ""
    return RateFit(float(slope), float(intercept), r2, len(used), note)


_CONFIG_KEYS = {
    "models": {"f": str, "g": str, "theorem": str},
    "grid": {"t_min": float, "t_max": float, "points": int},
    "tolerances": {"rel_tol": float},
    "output": {"out": str, "plot": str, "jobs": int},
}


def load_config(path: str) -> dict:
    """Read an INI config into a flat dict of typed values."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    with open(path) as fh:
        parser.read_file(fh)
    values: dict = {}
    for section in parser.sections():
        if section not in _CONFIG_KEYS:
            raise ValueError(f"{path}: unknown section [{section}]")
        for key, raw in parser.items(section):
            conv = _CONFIG_KEYS[section].get(key)
            if conv is None:
                raise ValueError(f"{path}: unknown key {key!r} in [{section}]")
            try:
                values[key] = conv(raw)
            except ValueError:
                raise ValueError(f"{path}: [{section}] {key} = {raw!r} is not a valid {conv.__name__}") from None
    return values


def make_config(file_values: dict, overrides: dict) -> SweepConfig:
    """Merge file values with non-None overrides into a :class:`SweepConfig`."""
    merged = dict(file_values)
    merged.update({k: v for k, v in overrides.items() if v is not None})
    if "f" not in merged:
        raise ValueError("no model given: set --f or [models] f")
    known = {f.name for f in fields(SweepConfig)}
    cfg = SweepConfig(**{k: v for k, v in merged.items() if k in known})
    if cfg.theorem not in THEOREMS:
        raise ValueError(f"unknown theorem {cfg.theorem!r}; choose from {', '.join(THEOREMS)}")
    return cfg


def records_to_text(records: Iterable[SweepRecord]) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()
