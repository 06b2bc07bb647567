"""Command-line front end: ``hbvm <command> [options]``.

Every command writes CSV (default) or JSON.  CSV output starts with a
``# config:`` comment holding the full parsed configuration, followed by a
header row.  Exit status: 0 success, 2 bad configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

from . import experiments
from .core import StageConvergenceError
from .driver import IntegrationError
from .miller import LMMS, SingularSystemError
from .problems import PROBLEMS, SingularityError

logger = logging.getLogger("hbvm")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

COLUMNS = {
    "kepler": ["method", "period", "error", "max_abs_dH", "steps"],
    "order": ["problem", "r", "k", "h", "steps", "error", "observed_order"],
    "energy": ["series", "n", "t", "H", "dH"],
    "miller": ["n", "forward", "bvp", "exact"],
    "stability": ["re_q", "im_q", "stable"],
    "stiffness": ["kind", "kappa", "gamma", "sigma", "well_represented", "steps"],
}


class ConfigError(ValueError):
    pass


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(rows, columns, config, fmt):
    """Serialize rows deterministically."""
    if fmt == "json":
        clean = [{c: row.get(c) for c in columns} for row in rows]
        for row in clean:
            for c, v in row.items():
                if isinstance(v, float) and not math.isfinite(v):
                    row[c] = repr(v)
        return json.dumps({"config": config, "columns": columns, "rows": clean}, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _parse_grid(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise ConfigError(f"--grid expects 're_min,re_max,im_min,im_max,n', got {text!r}") from None
    if len(parts) != 5 or parts[4] < 1 or parts[4] != int(parts[4]):
        raise ConfigError(f"--grid expects 're_min,re_max,im_min,im_max,n', got {text!r}")
    return (parts[0], parts[1]), (parts[2], parts[3]), int(parts[4])


def _validate(args):
    if not 0.0 <= args.e < 1.0:
        raise ConfigError("--e must lie in [0, 1)")
    r = args.r if args.r is not None else 1
    if r < 1 or (args.k is not None and args.k < r):
        raise ConfigError("need r >= 1 and k >= r")
    if args.k is not None and args.k > 64:
        raise ConfigError("k must be <= 64")
    if not args.tol > 0:
        raise ConfigError("--tol must be positive")
    if args.h < 0 or (args.command != "energy" and args.h == 0):
        raise ConfigError("--h must be positive")
    if args.periods < 0 or args.steps < 0:
        raise ConfigError("--periods and --steps must be non-negative")
    if args.n_final < 2:
        raise ConfigError("--n-final must be >= 2")
    if args.command == "stiffness" and not (args.lam < 0 and args.T > 0 and args.steps >= 1):
        raise ConfigError("stiffness needs --lambda < 0, --T > 0 and --steps >= 1")
    if args.command == "stability":
        _parse_grid(args.grid)
        if args.method not in LMMS:
            raise ConfigError(f"--method must be one of {sorted(LMMS)}")
    if args.command == "order" and args.problem not in (None, *PROBLEMS):
        raise ConfigError(f"--problem must be one of {sorted(PROBLEMS)}")


def cmd_kepler(args):
    k = args.k if args.k is not None else 4 * args.r
    runs = experiments.kepler_runs(e=args.e, r=args.r, k=k, tol=args.tol, periods=args.periods)
    return experiments.kepler_rows(runs)


def cmd_order(args):
    e = args.e
    if args.problem is None:
        problems = (("harmonic", {}), ("kepler", {"e": e}))
    elif args.problem == "kepler":
        problems = (("kepler", {"e": e}),)
    else:
        problems = ((args.problem, {}),)
    rs = (args.r,) if args.r is not None else (1, 2, 3)
    hs = tuple(args.h / 2 ** i for i in range(4))
    return experiments.order_study(rs=rs, hs=hs, problems=problems)


def cmd_energy(args):
    return experiments.energy_demo(h=args.h, steps=args.steps, r=args.r, e=args.e, tol=args.tol, periods=args.periods)


def cmd_miller(args):
    return experiments.miller_rows(args.n_final)


def cmd_stability(args):
    re_range, im_range, n = _parse_grid(args.grid)
    return experiments.stability_rows(args.method, re_range, im_range, n)


def cmd_stiffness(args):
    return experiments.stiffness_report(lam=args.lam, T=args.T, tol=args.tol, uniform_steps=args.steps, r=args.r)


COMMANDS = {
    "kepler": (cmd_kepler, "adaptive HBVM(k,r) vs Gauss HBVM(r,r) on the Kepler problem"),
    "order": (cmd_order, "fixed-step convergence table over one period"),
    "energy": (cmd_energy, "energy series: symplectic demo map, quartic oscillator, Kepler"),
    "miller": (cmd_miller, "forward recursion vs boundary value solution of y[n+2] = 100.5 y[n+1] - 50 y[n]"),
    "stability": (cmd_stability, "(k1,k2) absolute-stability flags on a grid of q = h*lambda"),
    "stiffness": (cmd_stiffness, "continuous vs discrete conditioning parameters"),
}

DEFAULTS = dict(problem=None, e=0.99, r=3, k=None, tol=1e-10, h=0.1, periods=10, steps=1000,
                n_final=10, lam=-1000.0, T=1.0, grid="-3,3,-3,3,61", method="trapezoidal", format="csv")
COMMAND_DEFAULTS = {
    "order": dict(r=None, e=0.6, h=0.1),
    "energy": dict(steps=100, periods=1),
    "stiffness": dict(r=2, tol=1e-8, steps=10),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", choices=sorted(PROBLEMS))
    common.add_argument("--e", type=float, help="Kepler eccentricity in [0, 1)")
    common.add_argument("--r", type=int, help="number of stage vectors (order 2r)")
    common.add_argument("--k", type=int, help="quadrature nodes (default 4r for Kepler)")
    common.add_argument("--tol", type=float, help="local error tolerance")
    common.add_argument("--h", type=float, help="step size")
    common.add_argument("--periods", type=int)
    common.add_argument("--steps", type=int)
    common.add_argument("--n-final", dest="n_final", type=int, help="final index for the Miller BVP")
    common.add_argument("--lambda", dest="lam", type=float, help="decay rate (negative)")
    common.add_argument("--T", type=float, help="interval length")
    common.add_argument("--grid", help="re_min,re_max,im_min,im_max,n")
    common.add_argument("--method", help="linear multistep method for the stability scan")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="hbvm", description="HBVM experiments, Miller's algorithm and stiffness diagnostics.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text)
    return parser


def parse_args(argv=None):
    args = build_parser().parse_args(argv)
    defaults = {**DEFAULTS, **COMMAND_DEFAULTS.get(args.command, {})}
    for key, value in defaults.items():
        if getattr(args, key) is None:
            setattr(args, key, value)
    return args


def config_dict(args):
    keys = ["command", *DEFAULTS]
    return {key: getattr(args, key) for key in keys}


def main(argv=None):
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        _validate(args)
    except ConfigError as exc:
        print(f"hbvm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    func = COMMANDS[args.command][0]
    try:
        rows = func(args)
    except (IntegrationError, StageConvergenceError, SingularityError, SingularSystemError) as exc:
        print(f"hbvm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = render(rows, COLUMNS[args.command], config_dict(args), args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
