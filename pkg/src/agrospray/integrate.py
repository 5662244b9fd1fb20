"""Fixed-step RK4 integration of states (forward) and costates (backward).

Thin wrapper over the compiled kernel (or its pure-Python fallback):
builds grids, validates inputs, and packages results as
:class:`Trajectory` objects.  The backward pass interpolates the stored
state trajectory with cubic Hermite polynomials, matching RK4's local
order at the half steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import COMPILED, kernel
from .model import (AdjointState, ControlSignal, ModelParams, ProblemKind,
                    ProblemSpec)

__all__ = ["Trajectory", "IntegratorConfig", "BlowUpError", "make_grid",
           "integrate_forward", "integrate_adjoint_backward",
           "integrate_with_event", "COMPILED"]


class BlowUpError(RuntimeError):
    """A trajectory left the finite range during integration."""

    def __init__(self, time: float):
        super().__init__(f"integration blew up at t = {time:.6g}")
        self.time = time


@dataclass(frozen=True)
class IntegratorConfig:
    """Step size and terminal-event location tolerance."""

    dt: float = 0.01
    event_tol: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.event_tol > 0:
            raise ValueError("event_tol must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Time grid plus per-node values (states or adjoints, shape (N, 3)).

    For state trajectories, derivs stores the RHS at each node; the
    backward pass needs it for Hermite interpolation.
    """

    grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray | None = None

    def __post_init__(self):
        grid = np.ascontiguousarray(self.grid, dtype=float)
        values = np.ascontiguousarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if self.derivs is not None:
            object.__setattr__(
                self, "derivs", np.ascontiguousarray(self.derivs, dtype=float))
        if grid.ndim != 1 or values.shape != (grid.size, 3):
            raise ValueError("trajectory values must be (len(grid), 3)")
        if grid.size >= 2 and not np.all(np.diff(grid) > 0):
            raise ValueError("trajectory grid must be strictly increasing")
        if not (np.all(np.isfinite(grid)) and np.all(np.isfinite(values))):
            raise ValueError("trajectory contains non-finite entries")

    @property
    def final(self) -> np.ndarray:
        return self.values[-1]

    def column(self, i: int) -> np.ndarray:
        return self.values[:, i]


def make_grid(T: float, dt: float) -> np.ndarray:
    """Uniform grid 0, dt, 2dt, ... with the last node exactly T."""
    n = int(math.floor(T / dt + 1e-9))
    grid = dt * np.arange(n + 1)
    if T - grid[-1] > 1e-9 * dt:
        grid = np.append(grid, T)
    else:
        grid[-1] = T
    return grid


def integrate_forward(spec: ProblemSpec, u: ControlSignal,
                      cfg: IntegratorConfig = IntegratorConfig(),
                      T: float | None = None) -> Trajectory:
    """RK4 trajectory of the state system on [0, T] under control u."""
    if T is None:
        T = spec.horizon
    if u.grid[0] > 0 or u.grid[-1] < T - 1e-9:
        raise ValueError("control signal does not cover [0, T]")
    grid = make_grid(T, cfg.dt)
    try:
        states, derivs = kernel.forward(grid, spec.init.as_array(),
                                        u.grid, u.values,
                                        spec.params.as_array())
    except ArithmeticError as err:
        raise BlowUpError(err.args[1]) from err
    return Trajectory(grid, states, derivs)


def integrate_adjoint_backward(traj: Trajectory, p: ModelParams,
                               kind: ProblemKind,
                               terminal: AdjointState = AdjointState(0, 0, 0),
                               cfg: IntegratorConfig = IntegratorConfig(),
                               ) -> Trajectory:
    """RK4 integration of the costate system from T down to 0.

    The costate RHS does not involve the control (the Hamiltonian's u
    terms are state-independent), so only the state trajectory is
    needed.  Output shares the trajectory's grid.
    """
    if traj.derivs is None:
        raise ValueError("state trajectory lacks stored derivatives")
    cost = 1.0 if kind is ProblemKind.FIXED_HORIZON else 0.0
    try:
        adj = kernel.backward(traj.grid, traj.values, traj.derivs,
                              terminal.as_array(), cost, p.as_array())
    except ArithmeticError as err:
        raise BlowUpError(err.args[1]) from err
    return Trajectory(traj.grid, adj)


def integrate_with_event(spec: ProblemSpec, u: ControlSignal,
                         cfg: IntegratorConfig = IntegratorConfig(),
                         T: float | None = None):
    """Integrate forward, stopping at the first down-crossing of v = 0.

    Returns (trajectory, event_time); event_time is None when v stays
    positive on [0, T].  The crossing is located by bisection on the
    final step until |v| <= cfg.event_tol.
    """
    if T is None:
        T = spec.horizon_bracket[1] if spec.kind is ProblemKind.MIN_TIME \
            else spec.horizon
    try:
        t, states, derivs, te = kernel.forward_event(
            spec.init.as_array(), cfg.dt, T, u.grid, u.values,
            spec.params.as_array(), cfg.event_tol)
    except ArithmeticError as err:
        raise BlowUpError(err.args[1]) from err
    traj = Trajectory(t, states, derivs)
    return traj, (None if math.isnan(te) else float(te))
