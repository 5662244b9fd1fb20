"""Controlled woods-spiders-vineyard dynamics and Pontryagin machinery.

Three interacting populations: insects in the woods ``f``, wanderer
spiders ``s`` and vineyard parasites ``v``.  Spraying enters through a
control ``u(t)`` in [0, 1] scaled by the poison intensity ``h``; a
fraction ``q`` of the spray lands on the vineyard, the rest drifts into
the woods, and ``K`` measures the collateral kill on spiders.

Everything in this module is a pure function of states, costates and
parameters; integration lives in :mod:`agrospray.integrate`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ModelParams",
    "PopulationState",
    "AdjointState",
    "ControlSignal",
    "ProblemKind",
    "ProblemSpec",
    "SingularDenominatorError",
    "NoInteriorEquilibriumError",
    "dynamics_rhs",
    "adjoint_rhs_fixed",
    "adjoint_rhs_mintime",
    "hamiltonian",
    "control_from_adjoint",
    "switching_function",
    "singular_control",
    "coexistence_equilibrium",
    "pest_free_feasibility",
]


class SingularDenominatorError(ArithmeticError):
    """Denominator of the singular control is numerically zero."""


class NoInteriorEquilibriumError(ValueError):
    """The three-species coexistence point is not in the positive octant."""


@dataclass(frozen=True)
class ModelParams:
    """Ecological and spraying constants (defaults: the reference data set).

    Units: rates in 1/day, hunting rates in 1/(individual*day),
    carrying capacities in individuals, the rest dimensionless.
    """

    r: float = 1.0      # insects' birth rate
    e: float = 2.5      # parasites' birth rate
    a: float = 3.1      # spider mortality
    b: float = 1.2      # hunting rate on vineyard pests
    c: float = 0.2      # hunting rate on woods insects
    h: float = 0.7      # spraying intensity
    q: float = 0.9      # on-target insecticide fraction
    k: float = 1.0      # prey-to-spider conversion efficiency
    W: float = 5.0      # woods carrying capacity
    V: float = 1000.0   # vineyard carrying capacity
    K: float = 0.01     # spray kill effect on spiders
    xi: float = 50.0    # control cost weight

    def __post_init__(self):
        vals = [self.r, self.e, self.a, self.b, self.c, self.h,
                self.q, self.k, self.W, self.V, self.K, self.xi]
        if not all(math.isfinite(x) for x in vals):
            raise ValueError("ModelParams fields must be finite")
        if any(x < 0 for x in vals):
            raise ValueError("ModelParams fields must be non-negative")
        if not 0.0 <= self.q <= 1.0:
            raise ValueError(f"q must lie in [0, 1], got {self.q}")
        if not 0.0 < self.k <= 1.0:
            raise ValueError(f"k must lie in (0, 1], got {self.k}")
        if self.W <= 0 or self.V <= 0:
            raise ValueError("carrying capacities W, V must be positive")

    def as_array(self) -> np.ndarray:
        """Kernel-facing packed layout [r, e, a, b, c, h, q, k, W, V, K]."""
        return np.array([self.r, self.e, self.a, self.b, self.c, self.h,
                         self.q, self.k, self.W, self.V, self.K], dtype=float)


@dataclass(frozen=True)
class PopulationState:
    """Population counts (f: woods insects, s: spiders, v: vineyard pests).

    Non-negativity is deliberately not enforced: the spraying terms are
    state-independent and can push components below zero, which the
    min-time problem uses as its terminal event.
    """

    f: float
    s: float
    v: float

    def __post_init__(self):
        if not (math.isfinite(self.f) and math.isfinite(self.s)
                and math.isfinite(self.v)):
            raise ValueError("PopulationState components must be finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.f, self.s, self.v], dtype=float)

    @classmethod
    def from_array(cls, x) -> "PopulationState":
        return cls(float(x[0]), float(x[1]), float(x[2]))


@dataclass(frozen=True)
class AdjointState:
    """Costate vector (l1, l2, l3) plus the abnormal multiplier l0.

    l0 is only meaningful for the min-time problem; the fixed-horizon
    problem is normal and fixes it to 1.
    """

    l1: float
    l2: float
    l3: float
    l0: float = 1.0

    def __post_init__(self):
        vals = (self.l1, self.l2, self.l3, self.l0)
        if not all(math.isfinite(x) for x in vals):
            raise ValueError("AdjointState components must be finite")
        if self.l0 < 0:
            raise ValueError("abnormal multiplier l0 must be >= 0")

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l2, self.l3], dtype=float)

    @classmethod
    def from_array(cls, l, l0: float = 1.0) -> "AdjointState":
        return cls(float(l[0]), float(l[1]), float(l[2]), l0)


@dataclass(frozen=True)
class ControlSignal:
    """Spray schedule on a strictly increasing time grid, values in [0, 1].

    Evaluation between nodes is piecewise linear; outside the grid the
    boundary value is held (only relevant for event-shortened steps).
    """

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.ascontiguousarray(self.grid, dtype=float)
        values = np.ascontiguousarray(self.values, dtype=float)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("control grid needs at least 2 nodes")
        if values.shape != grid.shape:
            raise ValueError("control grid and values must have equal length")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("control grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("control values must be finite")
        if values.min() < 0.0 or values.max() > 1.0:
            raise ValueError("control values must lie in [0, 1]")

    def __call__(self, t):
        return np.interp(t, self.grid, self.values)

    @property
    def duration(self) -> float:
        return float(self.grid[-1] - self.grid[0])

    @classmethod
    def constant(cls, level: float, t0: float, t1: float) -> "ControlSignal":
        return cls(np.array([t0, t1]), np.array([level, level], dtype=float))


class ProblemKind(enum.Enum):
    FIXED_HORIZON = "fixed-horizon"
    MIN_TIME = "min-time"


@dataclass(frozen=True)
class ProblemSpec:
    """A concrete optimal-control instance: parameters, start, horizon."""

    params: ModelParams
    init: PopulationState
    kind: ProblemKind = ProblemKind.FIXED_HORIZON
    horizon: float = 50.0                    # fixed-horizon T, days
    horizon_bracket: tuple = (0.0, 50.0)     # min-time search bounds

    def __post_init__(self):
        if self.init.f < 0 or self.init.s < 0 or self.init.v < 0:
            raise ValueError("initial populations must be non-negative")
        if self.kind is ProblemKind.FIXED_HORIZON and not self.horizon > 0:
            raise ValueError("horizon T must be positive")
        lo, hi = self.horizon_bracket
        if not (0 <= lo < hi):
            raise ValueError("horizon bracket must satisfy 0 <= lo < hi")


def _check_finite(*vals):
    for x in vals:
        if not math.isfinite(x):
            raise ValueError(f"non-finite input: {x!r}")


def dynamics_rhs(x: PopulationState, u: float, p: ModelParams) -> np.ndarray:
    """Time derivative (df, ds, dv) of the sprayed ecosystem."""
    _check_finite(x.f, x.s, x.v, u)
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"control value {u} outside [0, 1]")
    f, s, v = x.f, x.s, x.v
    df = p.r * f * (1 - f / p.W) - p.c * s * f - p.h * (1 - p.q) * u
    ds = s * (-p.a + p.k * p.b * v + p.k * p.c * f) - p.h * p.K * p.q * u
    dv = p.e * v * (1 - v / p.V) - p.b * s * v - p.h * p.q * u
    return np.array([df, ds, dv])


def _adjoint_rhs_core(l1, l2, l3, f, s, v, p: ModelParams):
    """Costate derivatives without any running-cost contribution."""
    dl1 = -l1 * (p.r * (1 - f / p.W) - p.r * f / p.W - p.c * s) - l2 * s * p.k * p.c
    dl2 = l1 * p.c * f - l2 * (-p.a + p.k * p.b * v + p.k * p.c * f) + l3 * p.b * v
    dl3 = -l2 * s * p.k * p.b - l3 * (p.e * (1 - v / p.V) - p.e * v / p.V - p.b * s)
    return dl1, dl2, dl3


def adjoint_rhs_fixed(l: AdjointState, x: PopulationState,
                      p: ModelParams) -> np.ndarray:
    """Costate derivatives for the fixed-horizon problem.

    The running cost v + xi/2 u^2 contributes the constant -1 to dl3;
    the control terms of the Hamiltonian are state-independent and drop
    out entirely.
    """
    _check_finite(l.l1, l.l2, l.l3, x.f, x.s, x.v)
    dl1, dl2, dl3 = _adjoint_rhs_core(l.l1, l.l2, l.l3, x.f, x.s, x.v, p)
    return np.array([dl1, dl2, dl3 - 1.0])


def adjoint_rhs_mintime(l: AdjointState, x: PopulationState,
                        p: ModelParams) -> np.ndarray:
    """Costate derivatives for the min-time problem (linear homogeneous in l)."""
    _check_finite(l.l1, l.l2, l.l3, x.f, x.s, x.v)
    return np.array(_adjoint_rhs_core(l.l1, l.l2, l.l3, x.f, x.s, x.v, p))


def hamiltonian(x: PopulationState, u: float, l: AdjointState,
                p: ModelParams, kind: ProblemKind) -> float:
    """Running cost plus costate-weighted dynamics."""
    if kind is ProblemKind.FIXED_HORIZON:
        running = x.v + 0.5 * p.xi * u * u
    else:
        running = l.l0
    rhs = dynamics_rhs(x, u, p)
    return float(running + l.l1 * rhs[0] + l.l2 * rhs[1] + l.l3 * rhs[2])


def control_from_adjoint(l: AdjointState, p: ModelParams) -> float:
    """Pointwise Hamiltonian minimizer for the quadratic-cost problem.

    Stationarity of u -> H gives u = h(l1 - l1 q + l2 K q + l3 q)/xi,
    clamped to the admissible interval [0, 1].  Requires xi > 0; the
    xi = 0 case is bang-bang and handled by the solvers.
    """
    if p.xi == 0.0:
        raise ZeroDivisionError(
            "control_from_adjoint needs xi > 0; xi = 0 is bang-bang")
    raw = p.h * (l.l1 - l.l1 * p.q + l.l2 * p.K * p.q + l.l3 * p.q) / p.xi
    return min(max(0.0, raw), 1.0)


def switching_function(l: AdjointState, p: ModelParams) -> float:
    """Coefficient of u in the min-time Hamiltonian.

    phi = -h(1-q) l1 - h K q l2 - h q l3.  phi < 0 calls for u = 1,
    phi > 0 for u = 0; a vanishing phi signals a singular arc.
    """
    _check_finite(l.l1, l.l2, l.l3)
    return float(-p.h * (1 - p.q) * l.l1 - p.h * p.K * p.q * l.l2
                 - p.h * p.q * l.l3)


def singular_control(x: PopulationState, l: AdjointState, p: ModelParams,
                     denom_rtol: float = 1e-10) -> float:
    """Control keeping the system on a singular arc (phi and its
    derivatives identically zero).

    phi depends on the costates only, so d(phi)/dt substitutes the
    costate ODEs and dd(phi)/dt^2 is affine in u:

        dd(phi)/dt^2 = alpha(x, l) + beta(x, l) u .

    The returned value is -alpha/beta; callers clamp it to [0, 1].
    Raises :class:`SingularDenominatorError` when |beta| is negligible
    relative to |alpha| (in particular whenever l = 0).
    """
    _check_finite(x.f, x.s, x.v, l.l1, l.l2, l.l3)
    alpha, beta = _singular_coefficients(x, l, p)
    if abs(beta) < denom_rtol * (1.0 + abs(alpha)):
        raise SingularDenominatorError(
            f"singular denominator {beta:.3e} below tolerance")
    return -alpha / beta


def _singular_coefficients(x: PopulationState, l: AdjointState,
                           p: ModelParams):
    """Coefficients (alpha, beta) of dd(phi)/dt^2 = alpha + beta*u.

    g := d(phi)/dt is a known function of (f, s, v, l1, l2, l3); the
    chain rule gives dd(phi)/dt^2 = grad_x(g).xdot + grad_l(g).ldot,
    and only xdot carries u, linearly, with constant coefficient
    (-h(1-q), -hKq, -hq).
    """
    f, s, v = x.f, x.s, x.v
    l1, l2, l3 = l.l1, l.l2, l.l3
    r, e, a, b, c, h, q, k, W, V, K = (p.r, p.e, p.a, p.b, p.c, p.h,
                                       p.q, p.k, p.W, p.V, p.K)

    # costate derivatives L = (L1, L2, L3) and their partials
    L1, L2, L3 = _adjoint_rhs_core(l1, l2, l3, f, s, v, p)

    # dLi/d(f, s, v)
    dL1 = (2 * l1 * r / W, l1 * c - l2 * k * c, 0.0)
    dL2 = (l1 * c - l2 * k * c, 0.0, -l2 * k * b + l3 * b)
    dL3 = (0.0, -l2 * k * b + l3 * b, 2 * l3 * e / V)
    # dLi/d(l1, l2, l3)
    eL1 = (-(r * (1 - 2 * f / W) - c * s), -s * k * c, 0.0)
    eL2 = (c * f, a - k * b * v - k * c * f, b * v)
    eL3 = (0.0, -s * k * b, -(e * (1 - 2 * v / V) - b * s))

    # g = dphi/dt = w . L with spray weights w
    w = (-h * (1 - q), -h * K * q, -h * q)
    gx = [w[0] * dL1[i] + w[1] * dL2[i] + w[2] * dL3[i] for i in range(3)]
    gl = [w[0] * eL1[i] + w[1] * eL2[i] + w[2] * eL3[i] for i in range(3)]

    # drift part of xdot (u = 0)
    F0 = (r * f * (1 - f / W) - c * s * f,
          s * (-a + k * b * v + k * c * f),
          e * v * (1 - v / V) - b * s * v)

    alpha = (gx[0] * F0[0] + gx[1] * F0[1] + gx[2] * F0[2]
             + gl[0] * L1 + gl[1] * L2 + gl[2] * L3)
    beta = gx[0] * w[0] + gx[1] * w[1] + gx[2] * w[2]
    return alpha, beta


def coexistence_equilibrium(p: ModelParams) -> PopulationState:
    """Interior steady state of the unsprayed system (u = 0).

    Solves rhs = 0 for f, s, v all positive:
        s* = (k b V + k c W - a) / (k b^2 V / e + k c^2 W / r)
        f* = W (1 - c s* / r),  v* = V (1 - b s* / e).
    """
    denom = p.k * p.b ** 2 * p.V / p.e + p.k * p.c ** 2 * p.W / p.r
    if denom <= 0:
        raise NoInteriorEquilibriumError("degenerate predation parameters")
    s = (p.k * p.b * p.V + p.k * p.c * p.W - p.a) / denom
    f = p.W * (1 - p.c * s / p.r)
    v = p.V * (1 - p.b * s / p.e)
    if f <= 0 or v <= 0 or s <= 0:
        raise NoInteriorEquilibriumError(
            f"coexistence point ({f:.4g}, {s:.4g}, {v:.4g}) not interior")
    return PopulationState(f, s, v)


def pest_free_feasibility(p: ModelParams) -> tuple:
    """Feasibility/stability inequalities of the pest-free equilibrium.

    Returns (a < c k W, c^2 k W e < b r (c k W - a)); both must hold for
    the pest-free state to be feasible and stable.
    """
    first = p.a < p.c * p.k * p.W
    second = p.c ** 2 * p.k * p.W * p.e < p.b * p.r * (p.c * p.k * p.W - p.a)
    return first, second
