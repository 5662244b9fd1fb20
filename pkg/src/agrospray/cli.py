"""Command-line interface.

Subcommands: ``simulate``, ``solve-fixed``, ``solve-mintime``,
``scenario <name>`` (or ``--all``) and ``list-scenarios``.  Global
flags: ``--config`` (flat key = value file), ``--out-dir``, ``--dt``.

Exit codes: 0 success, 1 configuration error, 2 solver
non-convergence, 3 infeasible problem.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from .config import ConfigError, load_config
from .integrate import BlowUpError, IntegratorConfig, integrate_forward
from .model import ControlSignal
from .output import write_csv, write_svg
from .scenarios import PRESETS, run_scenario
from .solver_fixed import solve_fixed
from .solver_mintime import UnreachableError, solve_min_time

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NO_CONVERGENCE = 2
EXIT_INFEASIBLE = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agrospray",
        description="Optimal insecticide spraying: simulation and "
                    "optimal-control solvers.")
    parser.add_argument("--config", metavar="PATH",
                        help="flat key = value configuration file")
    parser.add_argument("--out-dir", metavar="PATH", default=".",
                        help="directory for CSV/SVG artifacts")
    parser.add_argument("--dt", type=float, metavar="FLOAT",
                        help="integration step override (days)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate",
                           help="integrate the dynamics under a "
                                "constant spray level")
    p_sim.add_argument("--u", type=float, default=0.0,
                       help="constant control level in [0, 1]")

    sub.add_parser("solve-fixed",
                   help="fixed-horizon optimal spraying")
    sub.add_parser("solve-mintime",
                   help="minimal-time eradication")

    p_sc = sub.add_parser("scenario", help="run a named preset")
    p_sc.add_argument("name", nargs="?",
                      help="preset name (see list-scenarios)")
    p_sc.add_argument("--all", action="store_true",
                      help="run every preset")

    sub.add_parser("list-scenarios", help="print available presets")
    return parser


def _emit(out_dir, t, states, u, adjoints, label):
    os.makedirs(out_dir, exist_ok=True)
    write_csv(os.path.join(out_dir, "trajectory.csv"),
              t, states, u, adjoints)
    series = [("f", states[:, 0], "woods insects f(t)"),
              ("s", states[:, 1], "spiders s(t)"),
              ("v", states[:, 2], "vineyard parasites v(t)"),
              ("u", u, "spraying control u(t)")]
    for stem, values, title in series:
        write_svg(os.path.join(out_dir, f"{stem}.svg"),
                  f"{label}: {title}", t, values,
                  x_label="t [days]", y_label=stem)


def _cmd_simulate(args, loaded) -> int:
    if not 0.0 <= args.u <= 1.0:
        print("error: --u must lie in [0, 1]", file=sys.stderr)
        return EXIT_CONFIG
    spec = loaded.spec
    u = ControlSignal.constant(args.u, 0.0, spec.horizon)
    try:
        traj = integrate_forward(spec, u, loaded.integrator)
    except BlowUpError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    _emit(args.out_dir, traj.grid, traj.values, u(traj.grid),
          np.zeros_like(traj.values), "simulate")
    print(f"simulated T = {spec.horizon:g} days, final state "
          f"({traj.final[0]:.6g}, {traj.final[1]:.6g}, "
          f"{traj.final[2]:.6g})")
    return EXIT_OK


def _cmd_solve_fixed(args, loaded) -> int:
    report = solve_fixed(loaded.spec, loaded.fixed)
    grid = report.states.grid
    _emit(args.out_dir, grid, report.states.values, report.control(grid),
          report.adjoints.values, "solve-fixed")
    print(f"method {report.method}: J = {report.objective:.6f}, "
          f"{report.iterations} iterations, stationarity "
          f"{report.stationarity:.3e}")
    if not report.converged:
        print("warning: solver did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _cmd_solve_mintime(args, loaded) -> int:
    try:
        report = solve_min_time(loaded.spec, loaded.mintime)
    except UnreachableError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INFEASIBLE
    grid = report.states.grid
    _emit(args.out_dir, grid, report.states.values, report.control(grid),
          report.adjoints.values, "solve-mintime")
    print(f"minimal time T* = {report.t_star:.6f} days, terminal "
          f"v = {report.terminal_state.v:.3e}, "
          f"lambda0 = {report.lambda0:.6f}")
    return EXIT_OK


def _cmd_scenario(args) -> int:
    if args.all == bool(args.name):
        print("error: give exactly one of a scenario name or --all",
              file=sys.stderr)
        return EXIT_CONFIG
    names = sorted(PRESETS) if args.all else [args.name]
    dt = args.dt if args.dt else 0.01
    code = EXIT_OK
    for name in names:
        try:
            record = run_scenario(name, out_dir=args.out_dir, dt=dt)
        except KeyError as err:
            print(f"error: {err.args[0]}", file=sys.stderr)
            return EXIT_CONFIG
        except UnreachableError as err:
            print(f"error: {err}", file=sys.stderr)
            return EXIT_INFEASIBLE
        print(f"{name}: wrote {record.csv_path} "
              f"({record.duration:.2f} s)")
        report = record.report
        if report is not None and hasattr(report, "converged") \
                and not report.converged:
            print(f"warning: {name} did not converge", file=sys.stderr)
            code = EXIT_NO_CONVERGENCE
    return code


def _cmd_list_scenarios() -> int:
    width = max(len(n) for n in PRESETS)
    for name in sorted(PRESETS):
        print(f"{name:<{width}}  {PRESETS[name].description}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "list-scenarios":
        return _cmd_list_scenarios()
    if args.command == "scenario":
        return _cmd_scenario(args)
    try:
        loaded = load_config(args.config)
        if args.dt:
            integrator = IntegratorConfig(dt=args.dt)
            loaded = replace(
                loaded, integrator=integrator,
                fixed=replace(loaded.fixed, integrator=integrator),
                mintime=replace(loaded.mintime, integrator=integrator))
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "simulate":
        return _cmd_simulate(args, loaded)
    if args.command == "solve-fixed":
        return _cmd_solve_fixed(args, loaded)
    if args.command == "solve-mintime":
        return _cmd_solve_mintime(args, loaded)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
