"""``modekit`` command line: estimate a mode from CSV data or run the
coverage study tables."""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import fields

import numpy as np

from .bandwidth import BandwidthSchedule, parse_schedule
from .density import FLAVORS, SEMIRECURSIVE
from .estimator import KernelModeEstimator
from .inference import UnsupportedDimension
from .kernels import QuadratureError
from .montecarlo import (
    ReplicationError,
    SimulationConfig,
    format_csv,
    run_table1,
    run_table2,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3
EXIT_NUMERIC = 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: error: {message}", EXIT_INPUT)


def read_samples(path: str) -> np.ndarray:
    """Headerless CSV, one observation per row, same number of columns throughout."""
    rows = []
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or all(not c.strip() for c in row):
                    continue
                try:
                    values = [float(c) for c in row]
                except ValueError:
                    raise CliError(f"{path}: row {lineno}: not a number: {','.join(row)!r}")
                if not all(math.isfinite(v) for v in values):
                    raise CliError(f"{path}: row {lineno}: non-finite value")
                if rows and len(values) != len(rows[0]):
                    raise CliError(
                        f"{path}: row {lineno}: expected {len(rows[0])} columns, got {len(values)}"
                    )
                rows.append(values)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror}")
    if not rows:
        raise CliError(f"{path}: no observations")
    return np.array(rows, dtype=float)


def _sigmas(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid sigma list {text!r}")
    if not values or any(not v > 0 for v in values):
        raise argparse.ArgumentTypeError("sigmas must be positive")
    return values


def _schedule(text: str) -> str:
    try:
        parse_schedule(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))
    return text


def _decimals(text: str):
    # "none" stays a string so that it is not mistaken for an absent flag
    if text.lower() == "none":
        return "none"
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer or 'none', got {text!r}")


def _with_exponent(schedule: str, exponent: float | None) -> BandwidthSchedule:
    sched = parse_schedule(schedule)
    if exponent is None:
        return sched
    return BandwidthSchedule(exponent, sched.slow_factor, sched.scale)


def _pretty(text: str) -> str:
    rows = [line.split(",") for line in text.splitlines()]
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows) + "\n"


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"{path}: cannot read config: {exc}")
    known = {f.name for f in fields(SimulationConfig)}
    unknown = set(data) - known
    if unknown:
        raise CliError(f"{path}: unknown config keys: {', '.join(sorted(unknown))}")
    return data


def _simulation_config(args, names) -> SimulationConfig:
    values = _load_config(args.config)
    for name in names:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    if "c_alpha_decimals" in values and values["c_alpha_decimals"] == "none":
        values["c_alpha_decimals"] = None
    try:
        return SimulationConfig(**values)
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid configuration: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    est = sub.add_parser("estimate", help="estimate mode location, size and confidence ellipsoid")
    est.add_argument("input_csv")
    est.add_argument("--flavor", choices=FLAVORS, default=SEMIRECURSIVE)
    est.add_argument("--a", type=float, help="exponent of the location bandwidth")
    est.add_argument("--atilde", type=float, help="exponent of the size bandwidth")
    est.add_argument("--acheck", type=float, help="exponent of the curvature bandwidth")
    est.add_argument("--h", type=_schedule, default="n^(-1/7)/log")
    est.add_argument("--h-tilde", type=_schedule, default="n^(-1/5)/log")
    est.add_argument("--h-check", type=_schedule, default="n^(-1/9)")
    group = est.add_mutually_exclusive_group()
    group.add_argument("--ellipsoid", dest="ellipsoid", action="store_true", default=None)
    group.add_argument("--no-ellipsoid", dest="ellipsoid", action="store_false")
    est.add_argument("--alpha", type=float, default=0.05)
    est.add_argument("--grid", type=int, help="grid points per dimension")

    common = dict(default=None)
    sim = sub.add_parser("simulate", help="coverage study (Table 1 layout)")
    sim.add_argument("--sigmas", type=_sigmas, **common)
    sim.add_argument("--n", type=int, **common)
    sim.add_argument("--replications", type=int, **common)
    sim.add_argument("--alpha", type=float, **common)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--threads", type=int, **common)
    sim.add_argument("--grid-points", dest="grid_points", type=int, **common)

    t2 = sub.add_parser("table2", help="true-parameter ellipsoid axes (Table 2 layout)")
    t2.add_argument("--sigmas", type=_sigmas, **common)
    t2.add_argument("--n", type=int, **common)
    t2.add_argument("--alpha", type=float, **common)

    for p in (sim, t2):
        p.add_argument("--h", type=_schedule, **common)
        p.add_argument("--h-tilde", dest="h_tilde", type=_schedule, **common)
        p.add_argument("--h-check", dest="h_check", type=_schedule, **common)
        p.add_argument("--c-alpha-decimals", dest="c_alpha_decimals", type=_decimals,
                       **common, help="round the chi-square quantile ('none' keeps it exact)")
        p.add_argument("--config", help="JSON file with configuration values")
        p.add_argument("--pretty", action="store_true", help="align columns")
    return parser


def cmd_estimate(args) -> str:
    X = read_samples(args.input_csv)
    n, d = X.shape
    if args.ellipsoid and d != 1:
        raise CliError(f"--ellipsoid needs one-dimensional data, got {d} columns", EXIT_UNSUPPORTED)
    want_ellipsoid = d == 1 if args.ellipsoid is None else args.ellipsoid
    if want_ellipsoid and n < 2:
        raise CliError("the confidence ellipsoid needs at least 2 observations")
    try:
        est = KernelModeEstimator(
            location_bandwidth=_with_exponent(args.h, args.a),
            size_bandwidth=_with_exponent(args.h_tilde, args.atilde),
            curvature_bandwidth=_with_exponent(args.h_check, args.acheck),
            flavor=args.flavor,
            alpha=args.alpha,
            ellipsoid=want_ellipsoid,
            grid_points=args.grid,
        ).fit(X)
    except ValueError as exc:
        raise CliError(str(exc))
    lines = [("flavor", args.flavor), ("n", str(n))]
    for j, v in enumerate(est.location_):
        lines.append((f"theta[{j}]" if d > 1 else "theta", format(v, ".6g")))
    lines.append(("mu", format(est.size_, ".6g")))
    if est.ellipsoid_ is not None:
        e = est.ellipsoid_
        b, a = e.semi_axes
        lines += [
            ("f2", format(est.curvature_, ".6g")),
            ("P", format(e.p_coeff, ".6g")),
            ("Q", format(e.q_coeff, ".6g")),
            ("c_alpha", format(e.c_alpha, ".6g")),
            ("b", format(b, ".6g")),
            ("a", format(a, ".6g")),
        ]
    return "".join(f"{k},{v}\n" for k, v in lines)


def cmd_simulate(args) -> str:
    cfg = _simulation_config(args, ["sigmas", "n", "replications", "alpha", "seed", "threads",
                                    "grid_points", "h", "h_tilde", "h_check", "c_alpha_decimals"])
    out = format_csv(run_table1(cfg))
    return _pretty(out) if args.pretty else out


def cmd_table2(args) -> str:
    cfg = _simulation_config(args, ["sigmas", "n", "alpha", "h", "h_tilde", "h_check",
                                    "c_alpha_decimals"])
    out = format_csv(run_table2(cfg))
    return _pretty(out) if args.pretty else out


def main(argv=None) -> int:
    commands = {"estimate": cmd_estimate, "simulate": cmd_simulate, "table2": cmd_table2}
    try:
        args = build_parser().parse_args(argv)
        sys.stdout.write(commands[args.command](args))
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except UnsupportedDimension as exc:
        print(f"modekit: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (ReplicationError, QuadratureError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"modekit: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
