"""Minimal-time eradication: smallest T with v(T) = 0 under admissible
spraying.

Outer bisection on the horizon T over a feasibility predicate; the
predicate solves a terminal reach subproblem (projected gradient on
1/2 v(T)^2, warm-started at full spray).  The bisection bracket keeps
T_lo infeasible (or 0) and T_hi feasible throughout.  Bang/singular
structure is read off the switching function of the converged adjoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .integrate import (BlowUpError, IntegratorConfig, Trajectory,
                        integrate_forward, integrate_adjoint_backward,
                        integrate_with_event, make_grid)
from .model import (AdjointState, ControlSignal, ModelParams,
                    PopulationState, ProblemKind, ProblemSpec,
                    SingularDenominatorError, singular_control,
                    switching_function)

__all__ = ["MinTimeConfig", "MinTimeReport", "UnreachableError",
           "check_reachability", "solve_min_time",
           "pmp_diagnostics_mintime"]


class UnreachableError(RuntimeError):
    """Full spraying cannot eradicate the parasites within the bracket."""


@dataclass(frozen=True)
class MinTimeConfig:
    bracket: tuple = (0.0, 50.0)   # horizon search interval, days
    t_tol: float = 1e-4            # bisection tolerance on T, days
    terminal_tol: float = 1e-6     # |v(T)| defining a successful reach
    singular_threshold: float = 1e-3  # |phi| below which an arc counts
                                      # as singular
    inner_max_iter: int = 200      # reach-subproblem gradient iterations
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        lo, hi = self.bracket
        if not 0 <= lo < hi:
            raise ValueError("bracket must satisfy 0 <= T_lo < T_hi")
        if not (self.t_tol > 0 and self.terminal_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class MinTimeReport:
    """Minimal horizon, its control, trajectories and PMP data."""

    t_star: float
    control: ControlSignal
    states: Trajectory
    adjoints: Trajectory
    lambda0: float                 # abnormal multiplier, scaled so that
                                   # the terminal costate has unit norm
    terminal_state: PopulationState
    hamiltonian_residual: float    # sup over the grid of |min_u H|
    singular_arcs: tuple = ()      # (t_start, t_end) with |phi| below
                                   # threshold


def check_reachability(spec: ProblemSpec,
                       cfg: MinTimeConfig = MinTimeConfig()) -> bool:
    """Whether full spraying eradicates v within the bracket.

    Simulates u = 1 on [0, T_hi]; true iff v crosses zero with the
    spider population still positive at the crossing.
    """
    if spec.init.v <= 0:
        return True
    t_hi = cfg.bracket[1]
    u_one = ControlSignal.constant(1.0, 0.0, t_hi)
    try:
        traj, t_event = integrate_with_event(spec, u_one, cfg.integrator,
                                             T=t_hi)
    except BlowUpError:
        return False
    if t_event is None:
        return False
    return bool(np.all(traj.column(1) > 0))


def _reach_residual(spec: ProblemSpec, T: float, cfg: MinTimeConfig):
    """Minimize 1/2 v(T)^2 over controls on [0, T] by projected gradient.

    Returns (uv, grid, v_T) for the best control found; warm start is
    full spray, which is already optimal when eradication is achievable
    at all by time T.
    """
    p = spec.params
    grid = make_grid(T, cfg.integrator.dt)
    uv = np.ones_like(grid)

    def terminal_v(uv):
        traj, t_event = integrate_with_event(
            spec, ControlSignal(grid, uv), cfg.integrator, T=T)
        if t_event is not None:
            return 0.0, None
        return float(traj.final[2]), traj

    def gradient(traj):
        v_T = traj.final[2]
        adj = integrate_adjoint_backward(
            traj, p, ProblemKind.MIN_TIME,
            terminal=AdjointState(0.0, 0.0, v_T), cfg=cfg.integrator)
        l1, l2, l3 = adj.column(0), adj.column(1), adj.column(2)
        return -p.h * ((1 - p.q) * l1 + p.K * p.q * l2 + p.q * l3)

    v_T, traj = terminal_v(uv)
    if traj is None:
        return uv, grid, 0.0
    step = 1.0
    for _ in range(cfg.inner_max_iter):
        if v_T <= cfg.terminal_tol:
            break
        g = gradient(traj)
        accepted = False
        for _ in range(40):
            trial = np.clip(uv - step * g, 0.0, 1.0)
            try:
                v_t, traj_t = terminal_v(trial)
            except BlowUpError:
                step *= 0.5
                continue
            if traj_t is None or v_t < v_T:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        uv, v_T, traj = trial, v_t, traj_t
        if traj is None:
            return uv, grid, 0.0
        step *= 2.0
    return uv, grid, v_T


def solve_min_time(spec: ProblemSpec,
                   cfg: MinTimeConfig = MinTimeConfig()) -> MinTimeReport:
    """Bisection on the horizon with an inner reach subproblem.

    T_hi starts at the full-spray crossing time (feasible by
    construction); each midpoint is probed with the projected-gradient
    reach solve and the bracket halves until t_tol.
    """
    p = spec.params
    if spec.init.v <= 0:
        grid = np.array([0.0])
        control = ControlSignal(np.array([0.0, cfg.integrator.dt]),
                                np.zeros(2))
        states = Trajectory(grid, np.array([spec.init.as_array()]))
        adjoints = Trajectory(grid, np.zeros((1, 3)))
        return MinTimeReport(
            t_star=0.0, control=control, states=states, adjoints=adjoints,
            lambda0=1.0, terminal_state=spec.init,
            hamiltonian_residual=0.0)
    if not check_reachability(spec, cfg):
        raise UnreachableError(
            "full spraying does not eradicate v within the bracket; "
            "see check_reachability")

    t_lo = cfg.bracket[0]
    u_one = ControlSignal.constant(1.0, 0.0, cfg.bracket[1])
    _, t_event = integrate_with_event(spec, u_one, cfg.integrator,
                                      T=cfg.bracket[1])
    t_hi = float(t_event)
    best_uv, best_grid, _ = _reach_residual(spec, t_hi, cfg)
    while t_hi - t_lo > cfg.t_tol:
        t_mid = 0.5 * (t_lo + t_hi)
        uv, grid, v_T = _reach_residual(spec, t_mid, cfg)
        if v_T <= cfg.terminal_tol:
            t_hi, best_uv, best_grid = t_mid, uv, grid
        else:
            t_lo = t_mid
    control = ControlSignal(best_grid, best_uv)
    states, t_event = integrate_with_event(spec, control, cfg.integrator,
                                           T=t_hi)
    if t_event is not None:
        # trim the horizon to the located crossing inside the last step
        t_hi = t_event
    return _finalize(spec, control, states, t_hi, cfg)


def _finalize(spec, control, states, t_star, cfg) -> MinTimeReport:
    """Backward adjoint pass from the transversality costate and
    bang/singular structure extraction."""
    p = spec.params
    # f(T), s(T) free => l1(T) = l2(T) = 0; v(T) fixed => l3(T) = nu free.
    # min_u H = 0 at T with l = (0, 0, nu) forces l0 = -nu*vdot(T); vdot(T)
    # is negative at a down-crossing, so nu > 0 gives the normal case.
    # Scale so the terminal costate has unit norm: nu = 1, l0 = -vdot(T).
    nu = 1.0
    vdot_T = states.derivs[-1][2] if states.derivs is not None else -1.0
    lambda0 = max(-vdot_T, 0.0)
    adjoints = integrate_adjoint_backward(
        states, p, ProblemKind.MIN_TIME,
        terminal=AdjointState(0.0, 0.0, nu), cfg=cfg.integrator)
    phi = np.array([
        switching_function(AdjointState.from_array(adjoints.values[i]), p)
        for i in range(adjoints.grid.size)])
    h_residual = _min_hamiltonian_residual(states, adjoints, phi, lambda0, p)
    arcs = _singular_intervals(adjoints.grid, phi, cfg.singular_threshold)
    return MinTimeReport(
        t_star=float(t_star), control=control, states=states,
        adjoints=adjoints, lambda0=float(lambda0),
        terminal_state=PopulationState.from_array(states.final),
        hamiltonian_residual=h_residual, singular_arcs=arcs)


def _min_hamiltonian_residual(states, adjoints, phi, lambda0, p):
    """sup_t |min_u H|; the minimized Hamiltonian is constant (= 0) along
    a min-time extremal, so this doubles as a discretization check."""
    lam = adjoints.values
    worst = 0.0
    for i in range(states.grid.size):
        drift = float(lam[i] @ _drift(states.values[i], p))
        h_min = lambda0 + drift + min(0.0, phi[i])
        worst = max(worst, abs(h_min))
    return worst


def _drift(x, p):
    """Uncontrolled part of the dynamics (u = 0)."""
    f, s, v = x
    return np.array([
        p.r * f * (1 - f / p.W) - p.c * s * f,
        s * (-p.a + p.k * p.b * v + p.k * p.c * f),
        p.e * v * (1 - v / p.V) - p.b * s * v])


def _singular_intervals(grid, phi, threshold):
    """Maximal grid intervals with |phi| below the activation threshold."""
    small = np.abs(phi) < threshold
    arcs = []
    start = None
    for i, flag in enumerate(small):
        if flag and start is None:
            start = grid[i]
        elif not flag and start is not None:
            arcs.append((float(start), float(grid[i - 1])))
            start = None
    if start is not None:
        arcs.append((float(start), float(grid[-1])))
    return tuple(arcs)


def pmp_diagnostics_mintime(report: MinTimeReport, p: ModelParams,
                            threshold: float | None = None) -> dict:
    """Pontryagin consistency checks on a completed min-time solve.

    Returns the sup-norm of the minimized Hamiltonian, the fraction of
    the horizon where the reported control disagrees with the bang rule
    (excluding near-singular points), and the singular-arc record with
    the clamped singular control sampled on each arc.
    """
    if threshold is None:
        threshold = MinTimeConfig().singular_threshold
    adjoints = report.adjoints
    lam = adjoints.values
    if np.all(lam[-1] == 0.0) and report.lambda0 == 0.0:
        raise ValueError("trivial multipliers: nontriviality requires "
                         "(lambda, lambda0) != 0")
    grid = adjoints.grid
    phi = np.array([
        switching_function(AdjointState.from_array(lam[i]), p)
        for i in range(grid.size)])
    uv = report.control(grid)
    bang = np.where(phi < 0, 1.0, 0.0)
    regular = np.abs(phi) >= threshold
    disagree = float(np.mean(regular & (np.abs(uv - bang) > 0.5)))
    singular_values = []
    for (t0, t1) in report.singular_arcs:
        i = int(np.searchsorted(grid, 0.5 * (t0 + t1)))
        i = min(i, grid.size - 1)
        try:
            u_sing = singular_control(
                PopulationState.from_array(report.states.values[i]),
                AdjointState.from_array(lam[i]), p)
            singular_values.append((t0, t1, min(max(u_sing, 0.0), 1.0)))
        except SingularDenominatorError:
            singular_values.append((t0, t1, math.nan))
    return {
        "hamiltonian_residual": report.hamiltonian_residual,
        "bang_disagreement": disagree,
        "singular_arcs": tuple(singular_values),
    }
