"""Named scenario presets and the runner that writes their artifacts.

Each preset maps to one of the three drivers (plain simulation,
fixed-horizon solve, minimal-time solve) and writes, under its own
subdirectory, a trajectory CSV plus one SVG per population and one for
the control.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field

import numpy as np

from .config import PARAMETER_PRESETS
from .integrate import IntegratorConfig, integrate_forward
from .model import (ControlSignal, ModelParams, PopulationState,
                    ProblemKind, ProblemSpec)
from .solver_fixed import FixedSolveConfig, solve_fixed
from .solver_mintime import MinTimeConfig, solve_min_time

__all__ = ["ScenarioPreset", "RunRecord", "PRESETS", "run_scenario"]

_INIT = PopulationState(3.1, 3.7, 2.2)


@dataclass(frozen=True)
class ScenarioPreset:
    """A named, fully determined experiment."""

    name: str
    description: str
    solver: str                   # "simulate" | "fixed" | "mintime"
    params: ModelParams
    horizon: float = 50.0
    checks: tuple = ()            # qualitative expectations, documentation

    def spec(self) -> ProblemSpec:
        kind = (ProblemKind.MIN_TIME if self.solver == "mintime"
                else ProblemKind.FIXED_HORIZON)
        return ProblemSpec(self.params, _INIT, kind=kind,
                           horizon=self.horizon)


@dataclass(frozen=True)
class RunRecord:
    """Artifacts and outcome of one scenario run."""

    preset: ScenarioPreset
    report: object                # SolveReport, MinTimeReport or None
    t: np.ndarray
    states: np.ndarray
    u: np.ndarray
    adjoints: np.ndarray
    csv_path: str = ""
    svg_paths: tuple = ()
    duration: float = 0.0


def _preset_list():
    mt = PARAMETER_PRESETS["mintime-paper"]
    prose = PARAMETER_PRESETS["mintime-prose"]
    return [
        ScenarioPreset(
            "no-spray-50", "uncontrolled dynamics over 50 days",
            "simulate", ModelParams(), 50.0,
            ("u identically 0", "v oscillates")),
        ScenarioPreset(
            "no-spray-150", "uncontrolled dynamics over 150 days",
            "simulate", ModelParams(), 150.0,
            ("u identically 0", "approach to coexistence equilibrium")),
        ScenarioPreset(
            "no-spray-mintime",
            "uncontrolled dynamics with the slow-parasite birth rate",
            "simulate", ModelParams(e=0.3), 50.0,
            ("u identically 0",)),
        ScenarioPreset(
            "xi0-T50", "bang-bang cost-free spraying, 50 days",
            "fixed", ModelParams(xi=0.0), 50.0,
            ("u reaches 1 on a positive fraction of the horizon",)),
        ScenarioPreset(
            "xi0-T150", "bang-bang cost-free spraying, 150 days",
            "fixed", ModelParams(xi=0.0), 150.0,
            ("u = 1 on a contiguous interval beyond 50 days",
             "v pinned near 2 for an extended period")),
        ScenarioPreset(
            "xi50-T50", "quadratic-cost spraying, 50 days",
            "fixed", ModelParams(xi=50.0), 50.0,
            ("max u below 0.4", "u near 0 after day 20")),
        ScenarioPreset(
            "mintime-paper", "minimal-time eradication (reference data)",
            "mintime", ModelParams(**mt), 50.0,
            ("terminal v at 0 near t = 0.6", "u saturated at 1")),
        ScenarioPreset(
            "mintime-prose",
            "minimal-time eradication, only e lowered to 0.3",
            "mintime", ModelParams(**prose), 50.0,
            ("terminal v at 0", "u saturated at 1")),
    ]


PRESETS = {p.name: p for p in _preset_list()}


def _execute(preset: ScenarioPreset, dt: float):
    spec = preset.spec()
    integrator = IntegratorConfig(dt=dt)
    if preset.solver == "simulate":
        u = ControlSignal.constant(0.0, 0.0, preset.horizon)
        traj = integrate_forward(spec, u, integrator)
        return (None, traj.grid, traj.values, u(traj.grid),
                np.zeros_like(traj.values))
    if preset.solver == "fixed":
        report = solve_fixed(spec, FixedSolveConfig(integrator=integrator))
        grid = report.states.grid
        return (report, grid, report.states.values, report.control(grid),
                report.adjoints.values)
    if preset.solver == "mintime":
        report = solve_min_time(spec, MinTimeConfig(integrator=integrator))
        grid = report.states.grid
        return (report, grid, report.states.values, report.control(grid),
                report.adjoints.values)
    raise ValueError(f"unknown solver kind {preset.solver!r}")


def run_scenario(name: str, out_dir: str = ".",
                 dt: float = 0.01) -> RunRecord:
    """Execute a preset and write its CSV and SVG files.

    Files land in ``out_dir/<name>/``: trajectory.csv plus f.svg,
    s.svg, v.svg and u.svg.
    """
    from .output import write_csv, write_svg

    if name not in PRESETS:
        raise KeyError(f"unknown scenario {name!r}; available: "
                       + ", ".join(sorted(PRESETS)))
    preset = PRESETS[name]
    start = time.perf_counter()
    try:
        report, t, states, u, adjoints = _execute(preset, dt)
    except Exception as err:
        err.args = err.args + (f"while running scenario {name!r}",)
        raise
    target = os.path.join(out_dir, name)
    os.makedirs(target, exist_ok=True)
    csv_path = os.path.join(target, "trajectory.csv")
    write_csv(csv_path, t, states, u, adjoints)
    svg_paths = []
    series = [("f", states[:, 0], "woods insects f(t)"),
              ("s", states[:, 1], "spiders s(t)"),
              ("v", states[:, 2], "vineyard parasites v(t)"),
              ("u", u, "spraying control u(t)")]
    for stem, values, title in series:
        path = os.path.join(target, f"{stem}.svg")
        write_svg(path, f"{name}: {title}", t, values,
                  x_label="t [days]", y_label=stem)
        svg_paths.append(path)
    return RunRecord(
        preset=preset, report=report, t=t, states=states, u=u,
        adjoints=adjoints, csv_path=csv_path, svg_paths=tuple(svg_paths),
        duration=time.perf_counter() - start)
