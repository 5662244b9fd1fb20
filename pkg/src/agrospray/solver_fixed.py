"""Fixed-horizon spraying optimization: minimize int_0^T (v + xi/2 u^2) dt.

Two independent routes to the same problem:

* :func:`solve_fbs` -- forward-backward sweep: alternate state/costate
  integration with a relaxed update from the pointwise Hamiltonian
  minimizer (needs xi > 0).
* :func:`solve_projected_gradient` -- projected gradient with
  backtracking on the discretized control; also covers xi = 0, where
  the problem is bang-bang and the sweep's projection formula is
  undefined.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .integrate import (BlowUpError, IntegratorConfig, Trajectory,
                        integrate_forward, integrate_adjoint_backward,
                        integrate_with_event, make_grid)
from .model import (AdjointState, ControlSignal, ModelParams,
                    PopulationState, ProblemKind, ProblemSpec)

__all__ = ["FixedSolveConfig", "SolveReport", "evaluate_cost",
           "cost_gradient", "solve_fbs", "solve_projected_gradient",
           "solve_fixed"]


@dataclass(frozen=True)
class FixedSolveConfig:
    max_iter: int = 300
    relaxation: float = 0.5      # sweep update weight in (0, 1]
    tol: float = 1e-6            # sup-norm control change / residual
    ls_shrink: float = 0.5       # backtracking contraction
    ls_grow: float = 2.0         # step growth after an accepted iterate
    ls_max_backtracks: int = 30
    step0: float = 1.0           # initial gradient step
    bang_bang: bool = True       # xi = 0 only: structured bang synthesis
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)

    def __post_init__(self):
        if not 0 < self.relaxation <= 1:
            raise ValueError("relaxation weight must lie in (0, 1]")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")


@dataclass(frozen=True)
class SolveReport:
    """Converged control plus trajectories and diagnostics."""

    control: ControlSignal
    states: Trajectory
    adjoints: Trajectory
    objective: float
    iterations: int
    stationarity: float          # sup-norm PMP residual on the grid
    converged: bool
    method: str = ""


def evaluate_cost(traj: Trajectory, u: ControlSignal, p: ModelParams) -> float:
    """Composite-trapezoid quadrature of v(t) + xi/2 u(t)^2 on traj.grid."""
    if abs(traj.grid[0] - u.grid[0]) > 1e-9 \
            or abs(traj.grid[-1] - u.grid[-1]) > 1e-9:
        raise ValueError("trajectory and control cover different intervals")
    uv = u(traj.grid)
    integrand = traj.column(2) + 0.5 * p.xi * uv * uv
    return float(np.trapezoid(integrand, traj.grid))


def _gradient_density(adj: Trajectory, uv: np.ndarray,
                      p: ModelParams) -> np.ndarray:
    """dH/du along the grid: xi*u - h(1-q)l1 - hKq l2 - hq l3."""
    l1, l2, l3 = adj.column(0), adj.column(1), adj.column(2)
    return (p.xi * uv - p.h * (1 - p.q) * l1 - p.h * p.K * p.q * l2
            - p.h * p.q * l3)


def cost_gradient(u: ControlSignal, spec: ProblemSpec,
                  cfg: FixedSolveConfig = FixedSolveConfig()) -> np.ndarray:
    """L2 gradient density of the cost with respect to the control.

    Forward state integration, backward costate integration with
    lambda(T) = 0, then dH/du evaluated on the integration grid.
    Directional derivatives pair the returned density with a
    perturbation via trapezoid quadrature.
    """
    traj = integrate_forward(spec, u, cfg.integrator)
    adj = integrate_adjoint_backward(traj, spec.params,
                                     ProblemKind.FIXED_HORIZON,
                                     cfg=cfg.integrator)
    return _gradient_density(adj, u(traj.grid), spec.params)


def _forward_backward(spec, grid, uv, cfg):
    u = ControlSignal(grid, uv)
    traj = integrate_forward(spec, u, cfg.integrator)
    adj = integrate_adjoint_backward(traj, spec.params,
                                     ProblemKind.FIXED_HORIZON,
                                     cfg=cfg.integrator)
    return u, traj, adj


def _projection_formula(adj: Trajectory, p: ModelParams) -> np.ndarray:
    l1, l2, l3 = adj.column(0), adj.column(1), adj.column(2)
    raw = p.h * (l1 - l1 * p.q + l2 * p.K * p.q + l3 * p.q) / p.xi
    return np.clip(raw, 0.0, 1.0)


def _stationarity(uv: np.ndarray, adj: Trajectory, p: ModelParams) -> float:
    """Sup-norm PMP residual: distance to the projection formula for
    xi > 0, complementarity-weighted switching function for xi = 0."""
    if p.xi > 0:
        return float(np.max(np.abs(uv - _projection_formula(adj, p))))
    l1, l2, l3 = adj.column(0), adj.column(1), adj.column(2)
    phi = -p.h * (1 - p.q) * l1 - p.h * p.K * p.q * l2 - p.h * p.q * l3
    return float(np.max(np.minimum(uv, 1.0 - uv) * np.abs(phi)))


def solve_fbs(spec: ProblemSpec,
              cfg: FixedSolveConfig = FixedSolveConfig()) -> SolveReport:
    """Forward-backward sweep with relaxed control updates.

    Iterates state forward / costate backward / control toward the
    pointwise minimizer until the control change drops below cfg.tol.
    Non-convergence is reported via the flag, not raised.
    """
    if spec.params.xi <= 0:
        raise ValueError("solve_fbs requires xi > 0; use the projected "
                         "gradient solver for the bang-bang case")
    grid = make_grid(spec.horizon, cfg.integrator.dt)
    uv = np.zeros_like(grid)
    omega = cfg.relaxation
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        u, traj, adj = _forward_backward(spec, grid, uv, cfg)
        target = _projection_formula(adj, spec.params)
        new = (1 - omega) * uv + omega * target
        delta = float(np.max(np.abs(new - uv)))
        uv = new
        if delta < cfg.tol:
            converged = True
            break
    u, traj, adj = _forward_backward(spec, grid, uv, cfg)
    return SolveReport(
        control=u, states=traj, adjoints=adj,
        objective=evaluate_cost(traj, u, spec.params),
        iterations=iterations,
        stationarity=_stationarity(uv, adj, spec.params),
        converged=converged, method="fbs")


# --- structured bang synthesis for the xi = 0 problem ------------------
#
# Without the quadratic penalty the problem is control-affine and the
# minimizers of interest are bang-bang.  Gradient descent from u = 0
# converges to a low-spray stationary point with almost no saturation;
# the intensive-spraying regime (long u = 1 arcs pinning v near its
# full-spray equilibrium) is a distinct local solution that plain
# descent does not find.  The synthesis below constructs it directly:
# steer the state onto the u = 1 equilibrium (a short reach arc), hold
# u = 1 while the unstable mode stays small, re-center with another
# short reach arc, and repeat.  The hold arcs are then frozen and only
# the reach arcs are polished by projected gradient.

_DEV_CAP = 0.3        # admissible metric deviation before re-centering
_REACH_FIRST = 10.0   # days for the initial approach arc
_REACH_AGAIN = 5.0    # days for each re-centering arc
_METRIC_RIDGE = 1e-3  # isotropic floor added to the deviation metric


def _full_spray_equilibrium(p: ModelParams):
    """Newton solve for the u = 1 steady state near the unsprayed
    coexistence equilibrium; returns (point, Jacobian) or None."""

    def rhs(x):
        f, s, v = x
        return np.array([
            p.r * f * (1 - f / p.W) - p.c * s * f - p.h * (1 - p.q),
            s * (-p.a + p.k * p.b * v + p.k * p.c * f) - p.h * p.K * p.q,
            p.e * v * (1 - v / p.V) - p.b * s * v - p.h * p.q])

    def jac(x):
        f, s, v = x
        return np.array([
            [p.r * (1 - 2 * f / p.W) - p.c * s, -p.c * f, 0.0],
            [p.k * p.c * s, -p.a + p.k * p.b * v + p.k * p.c * f,
             p.k * p.b * s],
            [0.0, -p.b * v, p.e * (1 - 2 * v / p.V) - p.b * s]])

    x = np.array([0.6 * p.W, p.e / p.b, p.a / (p.k * p.b)])
    for _ in range(60):
        try:
            step = np.linalg.solve(jac(x), rhs(x))
        except np.linalg.LinAlgError:
            return None
        x = x - step
        if not np.all(np.isfinite(x)):
            return None
        if np.abs(step).max() < 1e-13:
            break
    if np.abs(rhs(x)).max() > 1e-9 or np.any(x <= 0):
        return None
    return x, jac(x)


def _unstable_metric(jacobian: np.ndarray) -> np.ndarray | None:
    """Deviation metric weighting the unstable left eigendirection of
    the full-spray equilibrium, with a small isotropic ridge."""
    eigvals, eigvecs = np.linalg.eig(jacobian.T)
    order = np.argsort(-eigvals.real)
    if eigvals[order[0]].real <= 0:
        return None
    w = eigvecs[:, order[0]]
    metric = np.real(np.outer(np.conj(w), w))
    return 0.5 * (metric + metric.T) + _METRIC_RIDGE * np.eye(3)


def _reach_arc(p: ModelParams, x0: np.ndarray, grid: np.ndarray,
               target: np.ndarray, metric: np.ndarray,
               cfg: FixedSolveConfig) -> np.ndarray:
    """Projected gradient on the terminal miss 1/2 (x(T)-eq)' M (x(T)-eq)
    over controls on the given (arc-local) grid."""
    spec = ProblemSpec(p, PopulationState(*x0))
    uv = np.zeros_like(grid)

    def value_and_gradient(uv):
        traj = integrate_forward(spec, ControlSignal(grid, uv),
                                 cfg.integrator, T=grid[-1])
        miss = traj.final - target
        val = 0.5 * float(miss @ metric @ miss)
        adj = integrate_adjoint_backward(
            traj, p, ProblemKind.MIN_TIME,
            terminal=AdjointState(*(metric @ miss)), cfg=cfg.integrator)
        l1, l2, l3 = adj.column(0), adj.column(1), adj.column(2)
        g = -p.h * ((1 - p.q) * l1 + p.K * p.q * l2 + p.q * l3)
        return val, g

    val, g = value_and_gradient(uv)
    step = 1.0
    for _ in range(800):
        if val < 1e-9:
            break
        accepted = False
        for _ in range(50):
            trial = np.clip(uv - step * g, 0.0, 1.0)
            try:
                val_t, g_t = value_and_gradient(trial)
            except BlowUpError:
                step *= cfg.ls_shrink
                continue
            if val_t < val:
                accepted = True
                break
            step *= cfg.ls_shrink
        if not accepted:
            break
        uv, val, g = trial, val_t, g_t
        step *= cfg.ls_grow
    return uv


def _hold_length(p: ModelParams, x0: np.ndarray, budget: int,
                 target: np.ndarray, metric: np.ndarray,
                 cfg: FixedSolveConfig) -> int:
    """Number of full u = 1 steps before the metric deviation from the
    full-spray equilibrium exceeds the cap (or v crosses zero)."""
    dt = cfg.integrator.dt
    spec = ProblemSpec(p, PopulationState(*x0))
    u_one = ControlSignal.constant(1.0, 0.0, budget * dt)
    traj, t_event = integrate_with_event(spec, u_one, cfg.integrator,
                                         T=budget * dt)
    miss = traj.values - target
    dev = np.sqrt(np.einsum("ij,jk,ik->i", miss, metric, miss))
    over = np.nonzero(dev > _DEV_CAP)[0]
    n_hold = int(over[0]) - 1 if over.size else traj.grid.size - 1
    if t_event is not None:
        n_hold = min(n_hold, traj.grid.size - 2)
    return max(n_hold, 0)


def _bang_synthesis(spec: ProblemSpec, grid: np.ndarray,
                    cfg: FixedSolveConfig):
    """Reach/hold control for xi = 0; returns (node values, polish mask)
    or None when the construction does not apply."""
    p = spec.params
    solved = _full_spray_equilibrium(p)
    if solved is None:
        return None
    target, jacobian = solved
    metric = _unstable_metric(jacobian)
    if metric is None:
        return None
    dt = cfg.integrator.dt
    n_last = grid.size - 1
    uv = np.zeros_like(grid)
    mask = np.ones_like(grid)
    i = 0
    reach_days = _REACH_FIRST
    try:
        while i < n_last:
            n_arc = min(int(round(reach_days / dt)), n_last - i)
            reach_days = _REACH_AGAIN
            x_here = _simulate_prefix(spec, grid, uv, i, cfg)
            uv[i:i + n_arc + 1] = _reach_arc(
                p, x_here, grid[i:i + n_arc + 1] - grid[i], target, metric,
                cfg)
            i += n_arc
            if i >= n_last:
                break
            x_here = _simulate_prefix(spec, grid, uv, i, cfg)
            n_hold = _hold_length(p, x_here, n_last - i, target, metric, cfg)
            if n_hold < 1:
                break
            uv[i + 1:i + n_hold + 1] = 1.0
            mask[i + 1:i + n_hold + 1] = 0.0
            i += n_hold
    except BlowUpError:
        return None
    return uv, mask


def _simulate_prefix(spec, grid, uv, i, cfg):
    if i == 0:
        return spec.init.as_array()
    traj = integrate_forward(spec, ControlSignal(grid, uv), cfg.integrator,
                             T=grid[i])
    return traj.final


def solve_projected_gradient(
        spec: ProblemSpec,
        cfg: FixedSolveConfig = FixedSolveConfig()) -> SolveReport:
    """Projected gradient descent on the node values of u.

    Backtracking (Armijo on the projected step) keeps the objective
    non-increasing; the step grows again after accepted iterates.
    Convergence is declared on the sup-norm of u - clamp(u - g).

    For xi = 0 with cfg.bang_bang the iteration starts from the
    reach/hold synthesis and polishes only the reach arcs (saturated
    hold arcs are frozen); trial controls that push a population
    negative are rejected, since the bang problem is unbounded below
    when states may leave the positive orthant.
    """
    p = spec.params
    grid = make_grid(spec.horizon, cfg.integrator.dt)
    uv = np.zeros_like(grid)
    mask = np.ones_like(grid)
    guard_positivity = p.xi == 0
    method = "projected-gradient"
    if guard_positivity and cfg.bang_bang:
        synthesized = _bang_synthesis(spec, grid, cfg)
        if synthesized is not None:
            uv, mask = synthesized
            method = "projected-gradient/bang"
    bang_route = method == "projected-gradient/bang"
    u, traj, adj = _forward_backward(spec, grid, uv, cfg)
    cost = evaluate_cost(traj, u, p)
    step = cfg.step0
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        g = _gradient_density(adj, uv, p) * mask
        residual = float(np.max(np.abs(uv - np.clip(uv - g, 0.0, 1.0))))
        if residual < cfg.tol:
            converged = True
            break
        accepted = False
        for _ in range(cfg.ls_max_backtracks):
            trial = np.clip(uv - step * g, 0.0, 1.0)
            try:
                u_t, traj_t, adj_t = _forward_backward(spec, grid, trial, cfg)
            except BlowUpError:
                # over-spraying pushed v < 0 into logistic blow-up;
                # treat as an infinitely bad trial and shrink
                step *= cfg.ls_shrink
                continue
            if guard_positivity and traj_t.values.min() < -1e-6:
                step *= cfg.ls_shrink
                continue
            cost_t = evaluate_cost(traj_t, u_t, p)
            # Armijo with the projected decrement
            decr = float(np.dot(g, uv - trial)) * (grid[1] - grid[0])
            if cost_t <= cost - 1e-4 * decr + 1e-14 * abs(cost):
                accepted = True
                break
            step *= cfg.ls_shrink
        if not accepted:
            # bang route: no feasible descent step left on the
            # polishable arcs is that route's stationarity
            converged = bang_route
            break
        improvement = cost - cost_t
        uv, u, traj, adj, cost = trial, u_t, traj_t, adj_t, cost_t
        step = min(step * cfg.ls_grow, 1e6)
        if bang_route and improvement <= cfg.tol * (1.0 + abs(cost)):
            converged = True
            break
    return SolveReport(
        control=ControlSignal(grid, uv), states=traj, adjoints=adj,
        objective=cost, iterations=iterations,
        stationarity=_stationarity(uv, adj, p),
        converged=converged, method=method)


def solve_fixed(spec: ProblemSpec,
                cfg: FixedSolveConfig = FixedSolveConfig()) -> SolveReport:
    """Dispatch: sweep for xi > 0, projected gradient for xi = 0."""
    if spec.params.xi > 0:
        return solve_fbs(spec, cfg)
    return solve_projected_gradient(spec, cfg)
