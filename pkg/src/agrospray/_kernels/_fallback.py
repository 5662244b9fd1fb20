"""Pure-Python RK4 kernels, API-identical to the Cython core.

All routines take packed parameter arrays
[r, e, a, b, c, h, q, k, W, V, K] and plain float64 ndarrays, and raise
ArithmeticError(message, time) on numerical blow-up.
"""

import math

import numpy as np

_BLOWUP = 1e12


def _rhs(f, s, v, u, r, e, a, b, c, h, q, k, W, V, K):
    df = r * f * (1 - f / W) - c * s * f - h * (1 - q) * u
    ds = s * (-a + k * b * v + k * c * f) - h * K * q * u
    dv = e * v * (1 - v / V) - b * s * v - h * q * u
    return df, ds, dv


def _adj_rhs(l1, l2, l3, f, s, v, cost, r, e, a, b, c, k, W, V):
    dl1 = -l1 * (r * (1 - f / W) - r * f / W - c * s) - l2 * s * k * c
    dl2 = l1 * c * f - l2 * (-a + k * b * v + k * c * f) + l3 * b * v
    dl3 = (-cost - l2 * s * k * b
           - l3 * (e * (1 - v / V) - e * v / V - b * s))
    return dl1, dl2, dl3


def _check(f, s, v, t):
    if not (math.isfinite(f) and math.isfinite(s) and math.isfinite(v)) \
            or abs(f) > _BLOWUP or abs(s) > _BLOWUP or abs(v) > _BLOWUP:
        raise ArithmeticError("state blow-up during integration", t)


def forward(t, x0, ugrid, uvals, par):
    """Integrate the state system over the node array t.

    Returns (states, derivs), both (N, 3); derivs holds the RHS at each
    node for later Hermite interpolation.
    """
    r, e, a, b, c, h, q, k, W, V, K = par
    n = t.shape[0]
    tm = 0.5 * (t[:-1] + t[1:])
    un = np.interp(t, ugrid, uvals)
    um = np.interp(tm, ugrid, uvals)

    states = np.empty((n, 3))
    derivs = np.empty((n, 3))
    f, s, v = float(x0[0]), float(x0[1]), float(x0[2])
    states[0] = (f, s, v)
    derivs[0] = _rhs(f, s, v, un[0], r, e, a, b, c, h, q, k, W, V, K)
    for i in range(n - 1):
        dt = t[i + 1] - t[i]
        u0, uh, u1 = un[i], um[i], un[i + 1]
        k1 = _rhs(f, s, v, u0, r, e, a, b, c, h, q, k, W, V, K)
        k2 = _rhs(f + 0.5 * dt * k1[0], s + 0.5 * dt * k1[1],
                  v + 0.5 * dt * k1[2], uh, r, e, a, b, c, h, q, k, W, V, K)
        k3 = _rhs(f + 0.5 * dt * k2[0], s + 0.5 * dt * k2[1],
                  v + 0.5 * dt * k2[2], uh, r, e, a, b, c, h, q, k, W, V, K)
        k4 = _rhs(f + dt * k3[0], s + dt * k3[1], v + dt * k3[2],
                  u1, r, e, a, b, c, h, q, k, W, V, K)
        f += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        s += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        v += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        _check(f, s, v, t[i + 1])
        states[i + 1] = (f, s, v)
        derivs[i + 1] = _rhs(f, s, v, u1, r, e, a, b, c, h, q, k, W, V, K)
    return states, derivs


def backward(t, states, derivs, terminal, cost, par):
    """Integrate the costate system from t[-1] down to t[0].

    cost is the constant running-cost contribution to dl3 (1.0 for the
    fixed-horizon problem, 0.0 for min-time).  States between nodes are
    cubic-Hermite interpolated from (states, derivs).
    """
    r, e, a, b, c, h, q, k, W, V, K = par
    n = t.shape[0]
    adj = np.empty((n, 3))
    l1, l2, l3 = float(terminal[0]), float(terminal[1]), float(terminal[2])
    adj[n - 1] = (l1, l2, l3)
    for i in range(n - 2, -1, -1):
        dt = t[i] - t[i + 1]  # negative
        x0 = states[i]
        x1 = states[i + 1]
        d0 = derivs[i]
        d1 = derivs[i + 1]
        # Hermite midpoint on [t_i, t_{i+1}]
        hstep = t[i + 1] - t[i]
        xm = 0.5 * (x0 + x1) + 0.125 * hstep * (d0 - d1)
        k1 = _adj_rhs(l1, l2, l3, x1[0], x1[1], x1[2], cost,
                      r, e, a, b, c, k, W, V)
        k2 = _adj_rhs(l1 + 0.5 * dt * k1[0], l2 + 0.5 * dt * k1[1],
                      l3 + 0.5 * dt * k1[2], xm[0], xm[1], xm[2], cost,
                      r, e, a, b, c, k, W, V)
        k3 = _adj_rhs(l1 + 0.5 * dt * k2[0], l2 + 0.5 * dt * k2[1],
                      l3 + 0.5 * dt * k2[2], xm[0], xm[1], xm[2], cost,
                      r, e, a, b, c, k, W, V)
        k4 = _adj_rhs(l1 + dt * k3[0], l2 + dt * k3[1], l3 + dt * k3[2],
                      x0[0], x0[1], x0[2], cost, r, e, a, b, c, k, W, V)
        l1 += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        l2 += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        l3 += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        _check(l1, l2, l3, t[i])
        adj[i] = (l1, l2, l3)
    return adj


def _step(f, s, v, t0, dt, ugrid, uvals, par):
    """One RK4 step of length dt starting at t0 (control interpolated)."""
    r, e, a, b, c, h, q, k, W, V, K = par
    u0 = np.interp(t0, ugrid, uvals)
    uh = np.interp(t0 + 0.5 * dt, ugrid, uvals)
    u1 = np.interp(t0 + dt, ugrid, uvals)
    k1 = _rhs(f, s, v, u0, r, e, a, b, c, h, q, k, W, V, K)
    k2 = _rhs(f + 0.5 * dt * k1[0], s + 0.5 * dt * k1[1],
              v + 0.5 * dt * k1[2], uh, r, e, a, b, c, h, q, k, W, V, K)
    k3 = _rhs(f + 0.5 * dt * k2[0], s + 0.5 * dt * k2[1],
              v + 0.5 * dt * k2[2], uh, r, e, a, b, c, h, q, k, W, V, K)
    k4 = _rhs(f + dt * k3[0], s + dt * k3[1], v + dt * k3[2],
              u1, r, e, a, b, c, h, q, k, W, V, K)
    return (f + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            s + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
            v + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]))


def forward_event(x0, dt, t_max, ugrid, uvals, par, vtol):
    """Integrate until v first crosses 0 from above or t reaches t_max.

    Returns (t, states, derivs, t_event); t_event is NaN when no
    crossing occurs.  On a crossing the last node sits at the located
    event time.
    """
    r, e, a, b, c, h, q, k, W, V, K = par

    def deriv_at(f, s, v, t):
        u = np.interp(t, ugrid, uvals)
        return _rhs(f, s, v, u, r, e, a, b, c, h, q, k, W, V, K)

    f, s, v = float(x0[0]), float(x0[1]), float(x0[2])
    ts = [0.0]
    xs = [(f, s, v)]
    ds = [deriv_at(f, s, v, 0.0)]
    if v <= 0.0:
        return (np.array(ts), np.array(xs), np.array(ds), 0.0)

    t = 0.0
    while t < t_max - 1e-14 * max(1.0, t_max):
        step = min(dt, t_max - t)
        fn, sn, vn = _step(f, s, v, t, step, ugrid, uvals, par)
        _check(fn, sn, vn, t + step)
        if vn <= 0.0:
            # bisect the step length to locate the crossing
            lo, hi = 0.0, step
            fe, se, ve = fn, sn, vn
            tau = step
            for _ in range(100):
                if abs(ve) <= vtol:
                    break
                tau = 0.5 * (lo + hi)
                fe, se, ve = _step(f, s, v, t, tau, ugrid, uvals, par)
                if ve > 0.0:
                    lo = tau
                else:
                    hi = tau
            te = t + tau
            ts.append(te)
            xs.append((fe, se, ve))
            ds.append(deriv_at(fe, se, ve, te))
            return (np.array(ts), np.array(xs), np.array(ds), te)
        f, s, v = fn, sn, vn
        t += step
        ts.append(t)
        xs.append((f, s, v))
        ds.append(deriv_at(f, s, v, t))
    return (np.array(ts), np.array(xs), np.array(ds), math.nan)
