"""Command-line entry point.

    eophot run <scenario> [--config PATH] [--seed N] [--out DIR] [--noise on|off]
    eophot fit <kind> --in CSV [--x COLUMN] [--y COLUMN]

Errors are reported as one JSON object on stderr with a nonzero exit code.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .config import SCENARIOS, ConfigError, ScenarioConfig, load_config
from .fitting import fit_dip, fit_poisson, fit_squared_sinusoid

FITS = {"sinusoid": fit_squared_sinusoid, "dip": fit_dip}

EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_DATA = 4
EXIT_RUNTIME = 5


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int, field: str | None = None):
        super().__init__(message)
        self.kind, self.message, self.code, self.field = kind, message, code, field


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, EXIT_USAGE)


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2**64)")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="eophot", description="Simulate and fit electro-optic photonic switching experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one scenario and write CSV outputs")
    run.add_argument("scenario", choices=SCENARIOS)
    run.add_argument("--config", help="TOML file overriding the shipped defaults")
    run.add_argument("--seed", type=_u64, default=0)
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--noise", choices=("on", "off"), default="on")

    fit = sub.add_parser("fit", help="fit a curve to a CSV column and print the parameters")
    fit.add_argument("kind", choices=sorted(FITS))
    fit.add_argument("--in", dest="infile", required=True)
    fit.add_argument("--x", help="x column (default: first)")
    fit.add_argument("--y", help="counts column (default: second)")
    return p


def _read_columns(path: str, x_name, y_name):
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror}", EXIT_DATA, "--in") from None
    if len(rows) < 2:
        raise CliError("data", "CSV needs a header row and data rows", EXIT_DATA, "--in")
    header = rows[0]

    def index(name, default):
        if name is None:
            if default >= len(header):
                raise CliError("data", "CSV needs at least two columns", EXIT_DATA, "--in")
            return default
        if name not in header:
            raise CliError("data", f"no column {name!r}", EXIT_DATA, "--x" if name == x_name else "--y")
        return header.index(name)

    ix, iy = index(x_name, 0), index(y_name, 1)
    try:
        x = np.array([float(r[ix]) for r in rows[1:]])
        y = np.array([float(r[iy]) for r in rows[1:]])
    except (ValueError, IndexError):
        raise CliError("data", "non-numeric or missing value in data rows", EXIT_DATA, "--in") from None
    return header[ix], header[iy], x, y


def _cmd_run(args) -> int:
    values = load_config(args.config)
    cfg = ScenarioConfig(args.scenario, values, args.seed, args.out, args.noise == "on")
    from .scenarios import run_scenario

    result = run_scenario(cfg)
    for name in result.files:
        print(name)
    return 0


def _cmd_fit(args) -> int:
    xname, yname, x, y = _read_columns(args.infile, args.x, args.y)
    try:
        res = fit_poisson(FITS[args.kind], x, y)
    except ValueError as exc:
        raise CliError("data", str(exc), EXIT_DATA, "--in") from None
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["quantity", "value", "uncertainty"])
    for k, v in res.params.items():
        w.writerow([k, repr(v), repr(res.errors[k])])
    w.writerow(["visibility", repr(res.visibility), repr(res.visibility_err)])
    w.writerow(["residual_norm", repr(res.residual_norm), ""])
    if not res.converged:
        print(json.dumps({"warning": "fit", "message": res.message}), file=sys.stderr)
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _cmd_run(args) if args.command == "run" else _cmd_fit(args)
    except CliError as exc:
        err = {"error": exc.kind, "message": exc.message}
        if exc.field:
            err["field"] = exc.field
        code = exc.code
    except ConfigError as exc:
        err = {"error": "config", "field": exc.field, "message": exc.message}
        code = EXIT_CONFIG
    except OSError as exc:
        err = {"error": "io", "message": str(exc)}
        code = EXIT_RUNTIME
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        err = {"error": "runtime", "message": str(exc)}
        code = EXIT_RUNTIME
    print(json.dumps(err), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
