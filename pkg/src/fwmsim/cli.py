"""Command-line front end: simulate / oracle / fit / converge.

Exit codes: 0 success, 2 config error, 3 numerical-invariant abort,
4 fit non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys

import numpy as np

from .evolve import IntegrationError, InvariantViolation
from .fitkit import FitConvergenceError, detrend, fit_two_harmonics
from .scenarios import (
    ConfigError,
    config_to_text,
    convergence_sweep,
    load_config,
    oracle_eval,
    preset_config,
    run_scenario,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_FIT = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fwmsim",
        description="Photon-pair Rabi oscillations in a three-mode Kerr resonator "
        "(rates in units of u, times in 1/u; output is CSV).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate one scenario and emit a trajectory CSV")
    src = sim.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario config file (key = value lines)")
    src.add_argument("--preset", help="compiled-in scenario name, e.g. fig2")
    sim.add_argument("--out", help="output CSV path")
    sim.add_argument("--dump-config", help="write the effective config file here")
    sim.add_argument(
        "--audit-positivity", action="store_true",
        help="check the smallest eigenvalue at every output instant (adds a min_eig column)",
    )

    orc = sub.add_parser("oracle", help="evaluate closed-form solutions on a time grid")
    orc.add_argument(
        "--formula", required=True,
        help="eq7|eq8|eq9|eq10|eigensystem (aliases: pair_probabilities, "
        "pair_occupations, weak_drive_pump0, weak_drive_pump12)",
    )
    orc.add_argument("--u", type=float, default=1.0)
    orc.add_argument("--gamma", type=float, default=0.0)
    orc.add_argument("--delta", type=float, default=0.0)
    orc.add_argument("--f", type=float, default=0.0, help="pump amplitude (weak-drive formulas)")
    orc.add_argument("--t-max", type=float, default=20.0)
    orc.add_argument("--dt-out", type=float, default=0.05)
    orc.add_argument("--out", required=True)

    fit = sub.add_parser("fit", help="two-harmonic damped fit of a trajectory CSV column")
    fit.add_argument("--in", dest="infile", required=True, help="trajectory CSV")
    fit.add_argument("--column", required=True, help="column to fit, e.g. N0")
    fit.add_argument("--omega", type=float, required=True, help="base frequency (units of u)")
    fit.add_argument("--out", required=True, help="one-row fit-report CSV")
    fit.add_argument("--period-hint", type=float, default=None,
                     help="detrend window; defaults to one half-frequency period 4*pi/omega")
    fit.add_argument("--t-min", type=float, default=None, help="fit window start")
    fit.add_argument("--t-max", type=float, default=None, help="fit window end")
    fit.add_argument("--free-omega", action="store_true",
                     help="fit the base frequency instead of holding it fixed")
    fit.add_argument("--gamma-scale", type=float, default=0.1,
                     help="initial guess for the harmonic decay rates")
    fit.add_argument("--alpha-max", type=float, default=None,
                     help="optional upper bound for the harmonic decay rates")

    conv = sub.add_parser("converge", help="truncation sweep against the largest cutoff")
    src = conv.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="scenario config file")
    src.add_argument("--preset", help="compiled-in scenario name")
    conv.add_argument("--nmax", required=True, help="comma list of cutoffs, e.g. 6,8,10,12")
    conv.add_argument("--out", required=True)

    return parser


def _load_scenario(args):
    if args.preset is not None:
        return preset_config(args.preset)
    return load_config(args.config)


def _cmd_simulate(args) -> int:
    config = _load_scenario(args)
    if args.audit_positivity:
        from dataclasses import replace

        config = replace(config, audit_positivity=True)
    if args.dump_config:
        with open(args.dump_config, "w", encoding="utf-8") as fh:
            fh.write(config_to_text(config))
    if args.out is None:
        if args.dump_config:
            return EXIT_OK
        raise ConfigError("simulate needs --out (or --dump-config)")
    run_scenario(config, out_path=args.out)
    return EXIT_OK


def _cmd_oracle(args) -> int:
    n = int(math.floor(args.t_max / args.dt_out + 1e-9)) + 1
    t_grid = args.dt_out * np.arange(n)
    params = {"u": args.u, "gamma": args.gamma, "delta": args.delta, "f": args.f}
    oracle_eval(args.formula, params, t_grid, out_path=args.out)
    return EXIT_OK


def _read_column(path: str, column: str):
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if "t" not in header or column not in header:
            raise ConfigError(f"CSV {path!r} lacks column 't' or {column!r}")
        it, ic = header.index("t"), header.index(column)
        t, v = [], []
        for row in reader:
            if row[ic] == "":
                continue
            t.append(float(row[it]))
            v.append(float(row[ic]))
    return np.asarray(t), np.asarray(v)


def _cmd_fit(args) -> int:
    t, values = _read_column(args.infile, args.column)
    if args.t_min is not None:
        keep = t >= args.t_min
        t, values = t[keep], values[keep]
    if args.t_max is not None:
        keep = t <= args.t_max
        t, values = t[keep], values[keep]
    positive = values > 0
    if not positive.all():
        first = int(np.argmax(positive)) if positive.any() else len(t)
        t, values = t[first:], values[first:]
        if len(t) == 0 or not (values > 0).all():
            raise ConfigError("fit column is not positive on the requested window")
    period_hint = args.period_hint if args.period_hint is not None else 4.0 * np.pi / args.omega
    det = detrend(t, values, period_hint)
    result = fit_two_harmonics(
        det.t, det.ratio, omega=args.omega,
        gamma_scale=args.gamma_scale, free_omega=args.free_omega, trend=det.trend,
    )
    header = ["b1", "alpha1", "phi1", "b2", "alpha2", "phi2",
              "omega_fit", "residual_rms", "dominant"]
    row = [f"{result.b1:.16e}", f"{result.alpha1:.16e}", f"{result.phi1:.16e}",
           f"{result.b2:.16e}", f"{result.alpha2:.16e}", f"{result.phi2:.16e}",
           f"{result.omega_fit:.16e}", f"{result.residual_rms:.16e}", result.dominant]
    write_csv(args.out, header, [row])
    return EXIT_OK


def _cmd_converge(args) -> int:
    config = _load_scenario(args)
    try:
        cutoffs = [int(part) for part in args.nmax.split(",") if part.strip()]
    except ValueError:
        raise ConfigError(f"--nmax must be a comma list of integers, got {args.nmax!r}") from None
    convergence_sweep(config, cutoffs, out_path=args.out)
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "oracle": _cmd_oracle,
    "fit": _cmd_fit,
    "converge": _cmd_converge,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"fwmsim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, InvariantViolation) as exc:
        print(f"fwmsim: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FitConvergenceError as exc:
        print(f"fwmsim: {exc}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    raise SystemExit(main())
