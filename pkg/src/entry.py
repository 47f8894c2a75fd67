"""Command-line entry point.

Parses the subcommand and its flags, resolves a RunConfig (flags over
environment over defaults) and routes to the matching handler.
"""

import argparse
import logging
import sys
from collections.abc import Callable, Sequence

from core.config import FORMATS, RunConfig
from core.errors import DeltaWVError
from core.logs import configure_logging
from core.reports.writer import compare_reports
from core.verify.wv_difference import GAMMA_SERIES_MAX_Z
from handlers.common import parse_eta, parse_number
from handlers.counterexample_gamma import handle_counterexample_gamma
from handlers.expand import handle_expand
from handlers.polygon import handle_polygon
from handlers.solve import handle_solve
from handlers.stirling import handle_stirling
from handlers.verify_expansion import handle_verify_expansion
from handlers.verify_first import handle_verify_first
from handlers.verify_wv import handle_verify_wv
from handlers.wv_report import handle_wv_report

logger = logging.getLogger("deltawv")

HANDLERS: dict[str, Callable[..., int]] = {
    "stirling": handle_stirling,
    "expand": handle_expand,
    "verify-expansion": handle_verify_expansion,
    "verify-first": handle_verify_first,
    "wv-report": handle_wv_report,
    "verify-wv": handle_verify_wv,
    "counterexample-gamma": handle_counterexample_gamma,
    "polygon": handle_polygon,
    "solve": handle_solve,
}

# flags shared by every subcommand; everything else lands in RunConfig.params
COMMON_FLAGS = ("prec", "out", "format", "digits", "workers", "max_prec", "gnuplot")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, help="working precision in bits (env DELTAWV_PREC)")
    common.add_argument("--out", help="report file (default: stdout)")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--digits", type=int, help="decimal digits for serialized numbers")
    common.add_argument("--workers", type=int, help="processes for grid rows (env DELTAWV_WORKERS)")
    common.add_argument("--max-prec", type=int, help="precision budget in bits")
    common.add_argument("--gnuplot", help="two-column log r / log err data file")
    return common


def _add_grid(parser: argparse.ArgumentParser, rmin: float, rmax: float, points: int) -> None:
    parser.add_argument("--rmin", type=float, default=rmin)
    parser.add_argument("--rmax", type=float, default=rmax)
    parser.add_argument("--points", type=int, default=points)


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="deltawv",
        description="Finite-difference Wiman-Valiron estimates for entire functions of order < 1",
    )
    parser.add_argument(
        "--compare", nargs=2, metavar=("A", "B"),
        help="exit 0 iff two report files are byte-identical",
    )
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("stirling", parents=[common], help="Stirling triangle S(n, m)")
    p.add_argument("--nmax", type=int, default=8)

    p = sub.add_parser("expand", parents=[common], help="truncated expansion vs Delta^n f/f")
    p.add_argument("--func", required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--eta", type=parse_eta, default=1)
    p.add_argument("--z", type=parse_number, nargs="+", required=True)

    for name, help_text in (
        ("verify-expansion", "decay of the truncated expansion error"),
        ("verify-first", "decay of the first-difference expansion error"),
    ):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--func", required=True)
        if name == "verify-expansion":
            p.add_argument("--n", type=int, default=1)
        p.add_argument("--N", type=int, default=1)
        p.add_argument("--eta", type=parse_eta, default=1)
        p.add_argument("--eps", type=float, default=0.05)
        _add_grid(p, 1e2, 1e6, 9)

    p = sub.add_parser("wv-report", parents=[common], help="mu, nu and M along a grid")
    p.add_argument("--func", required=True)
    p.add_argument("--circle-samples", type=int, default=256)
    p.add_argument("--k", type=int, help="also check pointwise bounds for orders 1..k")
    p.add_argument("--eps", type=float, default=0.1)
    _add_grid(p, 1e2, 1e6, 9)

    p = sub.add_parser("verify-wv", parents=[common], help="Delta^k f/f against (nu/r)^k")
    p.add_argument("--func", required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--eta", type=parse_eta, default=1)
    p.add_argument("--eps", type=float, default=0.05)
    _add_grid(p, 1e3, 1e7, 9)

    p = sub.add_parser("counterexample-gamma", parents=[common], help="1/Gamma identity check")
    p.add_argument("--z", type=parse_number, nargs="+", default=[2, 10, 50])
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--series-max-z", type=float, default=GAMMA_SERIES_MAX_Z)

    p = sub.add_parser("polygon", parents=[common], help="Newton-Puiseux polygon")
    p.add_argument("--eq", required=True)

    p = sub.add_parser("solve", parents=[common], help="minimal Newton-series solution")
    p.add_argument("--eq", required=True)
    p.add_argument("--terms", type=int)
    p.add_argument("--fit", action="store_true", help="run the regular-growth check")
    p.add_argument("--method", choices=("regular", "loglog"), default="regular")
    p.add_argument(
        "--sampling", choices=("majorant", "negative_axis", "positive_axis"), default="majorant"
    )
    p.add_argument("--show", type=int, default=20, help="coefficients listed without --fit")
    _add_grid(p, 1e3, 1e7, 9)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = vars(args)
    params = {
        key: value for key, value in values.items()
        if key not in COMMON_FLAGS and key not in ("command", "compare")
    }
    return RunConfig.from_env(
        args.command,
        prec=args.prec,
        out=args.out,
        format=args.format,
        digits=args.digits,
        workers=args.workers,
        max_prec=args.max_prec,
        gnuplot=args.gnuplot,
        params=params,
    )


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except DeltaWVError as exc:
        print(f"deltawv: {exc}", file=sys.stderr)
        return exc.exit_code

    if args.compare:
        same = compare_reports(*args.compare)
        logger.info("%s and %s are %s", *args.compare, "identical" if same else "different")
        return 0 if same else 1
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2

    try:
        config = resolve_config(args)
        return HANDLERS[config.command](config, argv)
    except DeltaWVError as exc:
        print(f"deltawv: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception:
        logger.exception("Unexpected failure in %s", args.command)
        return 3


if __name__ == "__main__":
    sys.exit(main())
