"""Command-line entry point: ``lighttail {oracle,expand,sweep,rate,selftest}``.

Exit codes: 0 success, 1 a check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

from .bench import (
    THEOREMS,
    fit_rate,
    load_config,
    make_config,
    predict,
    read_csv,
    resolve_model,
    run_sweep,
    write_csv,
    write_plot_data,
)
from .checks import format_report, run_all
from .expansion import m1_predict, m2_predict
from .models import CATALOG
from .oracle import DEFAULT_REL_TOL, conv_tail, partial_conv_integral

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _models_help() -> str:
    names = ", ".join(sorted(CATALOG))
    return f"model spec 'family:key=value,...' or a catalog name ({names})"


def _add_models(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--f", required=required, help=_models_help())
    p.add_argument("--g", help="second model (defaults to --f)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lighttail",
        description="Second-order tail expansions for convolutions of light-tailed laws, "
                    "checked against a high-precision convolution oracle.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oracle", help="evaluate P(X+Y>t) once")
    _add_models(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)

    p = sub.add_parser("expand", help="evaluate one prediction with its term breakdown")
    _add_models(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--theorem", choices=THEOREMS + ("m1", "m2"), default="auto")
    p.add_argument("--rel-tol", type=float, default=DEFAULT_REL_TOL)
    p.add_argument("--no-oracle", action="store_true", help="skip the oracle comparison")

    p = sub.add_parser("sweep", help="oracle vs prediction on a geometric t-grid, as CSV")
    _add_models(p, required=False)
    p.add_argument("--config", help="INI file with [models] [grid] [tolerances] [output]")
    p.add_argument("--theorem", choices=THEOREMS)
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--points", type=int)
    p.add_argument("--rel-tol", type=float)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out", help="CSV path ('-' for standard output, the default)")
    p.add_argument("--plot", help="write (log t, log rel_err2) pairs here")

    p = sub.add_parser("rate", help="fit log error against log t from a sweep CSV")
    p.add_argument("csv", help="CSV produced by 'sweep' ('-' for standard input)")
    p.add_argument("--column", choices=("rel_err1", "rel_err2"), default="rel_err2")
    p.add_argument("--expect-slope", type=float, help="fail (exit 1) unless the slope is within --slope-tol")
    p.add_argument("--slope-tol", type=float, default=0.1)

    p = sub.add_parser("selftest", help="run the acceptance checks A1-A5")
    p.add_argument("--only", help="comma-separated subset, e.g. A1,A3")
    p.add_argument("--perturb-leading", type=float, default=0.0,
                   help="debug: scale the Weibull leading constant by (1 + value)")
    p.add_argument("--oracle-rel-tol", type=float, default=DEFAULT_REL_TOL,
                   help="debug: oracle tolerance used by the exactness check")
    return parser


def _pair(args):
    F = resolve_model(args.f)
    G = resolve_model(args.g) if args.g else F
    return F, G


def _cmd_oracle(args) -> int:
    F, G = _pair(args)
    r = conv_tail(F, G, args.t, rel_tol=args.rel_tol)
    print(f"t              {args.t:.17g}")
    print(f"log_tail       {r.log_value:.17g}")
    print(f"tail           {r.value:.17g}")
    print(f"rel_error_est  {r.rel_error_estimate:.3g}")
    print(f"evaluations    {r.evaluations}")
    return EXIT_OK


def _cmd_expand(args) -> int:
    F, G = _pair(args)
    if args.theorem == "m1":
        res = m1_predict(F, G, args.t)
        truth = lambda: partial_conv_integral(F, G, args.t, rel_tol=args.rel_tol)
    elif args.theorem == "m2":
        res = m2_predict(F, G, args.t)
        truth = lambda: (partial_conv_integral(G, F, args.t, rel_tol=args.rel_tol),
                         F.log_survival(args.t / 2) + G.log_survival(args.t / 2))
    else:
        res = predict(args.theorem, F, G, args.t)
        truth = lambda: conv_tail(F, G, args.t, rel_tol=args.rel_tol).log_value
    print(f"branch               {res.branch}")
    print(f"log_scale            {res.log_scale:.17g}")
    print(f"leading              {res.leading:.17g}")
    for name, val in res.corrections:
        print(f"  {name:<18} {val:.17g}")
    print(f"first_order_log      {res.first_order_log_tail:.17g}")
    print(f"predicted_log        {res.predicted_log_tail:.17g}")
    print(f"error_order          {res.error_order}")
    if not args.no_oracle:
        got = truth()
        if isinstance(got, tuple):
            a, b = got
            got = max(a, b) + math.log1p(math.exp(min(a, b) - max(a, b)))
        print(f"oracle_log           {got:.17g}")
        print(f"rel_err1             {abs(math.expm1(res.first_order_log_tail - got)):.3g}")
        print(f"rel_err2             {abs(math.expm1(res.predicted_log_tail - got)):.3g}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    file_values = load_config(args.config) if args.config else {}
    overrides = {k: getattr(args, k) for k in
                 ("f", "g", "theorem", "t_min", "t_max", "points", "rel_tol", "jobs", "out", "plot")}
    cfg = make_config(file_values, overrides)
    records = run_sweep(cfg)
    if cfg.out and cfg.out != "-":
        with open(cfg.out, "w", newline="") as fh:
            write_csv(records, fh)
    else:
        write_csv(records, sys.stdout)
    if cfg.plot:
        with open(cfg.plot, "w") as fh:
            write_plot_data(records, fh)
    return EXIT_OK


def _cmd_rate(args) -> int:
    if args.csv == "-":
        records = read_csv(sys.stdin)
    else:
        with open(args.csv, newline="") as fh:
            records = read_csv(fh)
    fit = fit_rate(records, args.column)
    print(f"column       {args.column}")
    print(f"slope        {fit.slope:.6f}")
    print(f"intercept    {fit.intercept:.6f}")
    print(f"r_squared    {fit.r_squared:.6f}")
    print(f"points_used  {fit.points_used}")
    if fit.note:
        print(f"note         {fit.note}")
    if args.expect_slope is not None and abs(fit.slope - args.expect_slope) > args.slope_tol:
        print(f"slope {fit.slope:.4f} is not within {args.slope_tol} of {args.expect_slope}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _cmd_selftest(args) -> int:
    only = {s.strip().upper() for s in args.only.split(",")} if args.only else None
    if only and not only <= {"A1", "A2", "A3", "A4", "A5"}:
        raise UsageError(f"--only takes a subset of A1..A5, got {args.only}")
    results = run_all(leading_scale=1.0 + args.perturb_leading,
                      oracle_rel_tol=args.oracle_rel_tol, only=only)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK


COMMANDS = {
    "oracle": _cmd_oracle,
    "expand": _cmd_expand,
    "sweep": _cmd_sweep,
    "rate": _cmd_rate,
    "selftest": _cmd_selftest,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ValueError, OSError) as exc:
        # ModelSpecError and HypothesisError are ValueErrors
        print(f"lighttail {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
