# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled RK4 kernels; see _fallback.py for the reference semantics."""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, isfinite, NAN

cnp.import_array()

cdef double _BLOWUP = 1e12


cdef inline void _rhs(double f, double s, double v, double u,
                      double* par, double* out) noexcept nogil:
    # par = [r, e, a, b, c, h, q, k, W, V, K]
    out[0] = par[0] * f * (1 - f / par[8]) - par[4] * s * f \
        - par[5] * (1 - par[6]) * u
    out[1] = s * (-par[2] + par[7] * par[3] * v + par[7] * par[4] * f) \
        - par[5] * par[10] * par[6] * u
    out[2] = par[1] * v * (1 - v / par[9]) - par[3] * s * v \
        - par[5] * par[6] * u


cdef inline void _adj_rhs(double l1, double l2, double l3,
                          double f, double s, double v, double cost,
                          double* par, double* out) noexcept nogil:
    cdef double r = par[0], e = par[1], a = par[2], b = par[3], c = par[4]
    cdef double k = par[7], W = par[8], V = par[9]
    out[0] = -l1 * (r * (1 - f / W) - r * f / W - c * s) - l2 * s * k * c
    out[1] = l1 * c * f - l2 * (-a + k * b * v + k * c * f) + l3 * b * v
    out[2] = -cost - l2 * s * k * b \
        - l3 * (e * (1 - v / V) - e * v / V - b * s)


cdef inline int _bad(double x, double y, double z) noexcept nogil:
    return (not isfinite(x)) or (not isfinite(y)) or (not isfinite(z)) \
        or fabs(x) > _BLOWUP or fabs(y) > _BLOWUP or fabs(z) > _BLOWUP


cdef double _interp(double t, double[::1] xp, double[::1] fp) noexcept nogil:
    cdef Py_ssize_t n = xp.shape[0]
    cdef Py_ssize_t lo = 0, hi = n - 1, mid
    if t <= xp[0]:
        return fp[0]
    if t >= xp[n - 1]:
        return fp[n - 1]
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if xp[mid] <= t:
            lo = mid
        else:
            hi = mid
    return fp[lo] + (fp[hi] - fp[lo]) * (t - xp[lo]) / (xp[hi] - xp[lo])


def forward(double[::1] t, double[::1] x0,
            double[::1] ugrid, double[::1] uvals, double[::1] par):
    cdef Py_ssize_t n = t.shape[0], i, j
    cdef cnp.ndarray[double, ndim=2] states = np.empty((n, 3))
    cdef cnp.ndarray[double, ndim=2] derivs = np.empty((n, 3))
    tm = 0.5 * (np.asarray(t)[:-1] + np.asarray(t)[1:])
    cdef double[::1] un = np.interp(np.asarray(t), ugrid, uvals)
    cdef double[::1] um = np.interp(tm, ugrid, uvals) if n > 1 \
        else np.empty(0)
    cdef double[:, ::1] sv = states
    cdef double[:, ::1] dv = derivs
    cdef double f = x0[0], s = x0[1], v = x0[2]
    cdef double dt, u0, uh, u1
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double* p = &par[0]
    cdef int blew = 0
    cdef double tbad = 0.0

    sv[0, 0] = f; sv[0, 1] = s; sv[0, 2] = v
    _rhs(f, s, v, un[0], p, k1)
    dv[0, 0] = k1[0]; dv[0, 1] = k1[1]; dv[0, 2] = k1[2]
    with nogil:
        for i in range(n - 1):
            dt = t[i + 1] - t[i]
            u0 = un[i]; uh = um[i]; u1 = un[i + 1]
            _rhs(f, s, v, u0, p, k1)
            _rhs(f + 0.5 * dt * k1[0], s + 0.5 * dt * k1[1],
                 v + 0.5 * dt * k1[2], uh, p, k2)
            _rhs(f + 0.5 * dt * k2[0], s + 0.5 * dt * k2[1],
                 v + 0.5 * dt * k2[2], uh, p, k3)
            _rhs(f + dt * k3[0], s + dt * k3[1], v + dt * k3[2], u1, p, k4)
            f += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            s += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            v += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            if _bad(f, s, v):
                blew = 1; tbad = t[i + 1]
                break
            sv[i + 1, 0] = f; sv[i + 1, 1] = s; sv[i + 1, 2] = v
            _rhs(f, s, v, u1, p, k1)
            dv[i + 1, 0] = k1[0]; dv[i + 1, 1] = k1[1]; dv[i + 1, 2] = k1[2]
    if blew:
        raise ArithmeticError("state blow-up during integration", tbad)
    return states, derivs


def backward(double[::1] t, double[:, ::1] states, double[:, ::1] derivs,
             double[::1] terminal, double cost, double[::1] par):
    cdef Py_ssize_t n = t.shape[0], i
    cdef cnp.ndarray[double, ndim=2] adj = np.empty((n, 3))
    cdef double[:, ::1] av = adj
    cdef double l1 = terminal[0], l2 = terminal[1], l3 = terminal[2]
    cdef double dt, hstep
    cdef double xm[3]
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double* p = &par[0]
    cdef int blew = 0
    cdef double tbad = 0.0

    av[n - 1, 0] = l1; av[n - 1, 1] = l2; av[n - 1, 2] = l3
    with nogil:
        for i in range(n - 2, -1, -1):
            dt = t[i] - t[i + 1]
            hstep = t[i + 1] - t[i]
            xm[0] = 0.5 * (states[i, 0] + states[i + 1, 0]) \
                + 0.125 * hstep * (derivs[i, 0] - derivs[i + 1, 0])
            xm[1] = 0.5 * (states[i, 1] + states[i + 1, 1]) \
                + 0.125 * hstep * (derivs[i, 1] - derivs[i + 1, 1])
            xm[2] = 0.5 * (states[i, 2] + states[i + 1, 2]) \
                + 0.125 * hstep * (derivs[i, 2] - derivs[i + 1, 2])
            _adj_rhs(l1, l2, l3, states[i + 1, 0], states[i + 1, 1],
                     states[i + 1, 2], cost, p, k1)
            _adj_rhs(l1 + 0.5 * dt * k1[0], l2 + 0.5 * dt * k1[1],
                     l3 + 0.5 * dt * k1[2], xm[0], xm[1], xm[2], cost, p, k2)
            _adj_rhs(l1 + 0.5 * dt * k2[0], l2 + 0.5 * dt * k2[1],
                     l3 + 0.5 * dt * k2[2], xm[0], xm[1], xm[2], cost, p, k3)
            _adj_rhs(l1 + dt * k3[0], l2 + dt * k3[1], l3 + dt * k3[2],
                     states[i, 0], states[i, 1], states[i, 2], cost, p, k4)
            l1 += dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
            l2 += dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
            l3 += dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
            if _bad(l1, l2, l3):
                blew = 1; tbad = t[i]
                break
            av[i, 0] = l1; av[i, 1] = l2; av[i, 2] = l3
    if blew:
        raise ArithmeticError("state blow-up during integration", tbad)
    return adj


cdef void _step(double f, double s, double v, double t0, double dt,
                double[::1] ugrid, double[::1] uvals, double* p,
                double* out) noexcept nogil:
    cdef double u0 = _interp(t0, ugrid, uvals)
    cdef double uh = _interp(t0 + 0.5 * dt, ugrid, uvals)
    cdef double u1 = _interp(t0 + dt, ugrid, uvals)
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    _rhs(f, s, v, u0, p, k1)
    _rhs(f + 0.5 * dt * k1[0], s + 0.5 * dt * k1[1],
         v + 0.5 * dt * k1[2], uh, p, k2)
    _rhs(f + 0.5 * dt * k2[0], s + 0.5 * dt * k2[1],
         v + 0.5 * dt * k2[2], uh, p, k3)
    _rhs(f + dt * k3[0], s + dt * k3[1], v + dt * k3[2], u1, p, k4)
    out[0] = f + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    out[1] = s + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    out[2] = v + dt / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])


def forward_event(double[::1] x0, double dt, double t_max,
                  double[::1] ugrid, double[::1] uvals, double[::1] par,
                  double vtol):
    cdef double f = x0[0], s = x0[1], v = x0[2]
    cdef double* p = &par[0]
    cdef double t = 0.0, step, tau, lo, hi, te
    cdef double nxt[3]
    cdef double evt[3]
    cdef double d[3]
    cdef int it

    ts = [0.0]
    _rhs(f, s, v, _interp(0.0, ugrid, uvals), p, d)
    xs = [(f, s, v)]
    ds = [(d[0], d[1], d[2])]
    if v <= 0.0:
        return (np.array(ts), np.array(xs), np.array(ds), 0.0)

    while t < t_max - 1e-14 * max(1.0, t_max):
        step = dt if dt < t_max - t else t_max - t
        _step(f, s, v, t, step, ugrid, uvals, p, nxt)
        if _bad(nxt[0], nxt[1], nxt[2]):
            raise ArithmeticError("state blow-up during integration", t + step)
        if nxt[2] <= 0.0:
            lo = 0.0; hi = step; tau = step
            evt[0] = nxt[0]; evt[1] = nxt[1]; evt[2] = nxt[2]
            for it in range(100):
                if fabs(evt[2]) <= vtol:
                    break
                tau = 0.5 * (lo + hi)
                _step(f, s, v, t, tau, ugrid, uvals, p, evt)
                if evt[2] > 0.0:
                    lo = tau
                else:
                    hi = tau
            te = t + tau
            _rhs(evt[0], evt[1], evt[2], _interp(te, ugrid, uvals), p, d)
            ts.append(te)
            xs.append((evt[0], evt[1], evt[2]))
            ds.append((d[0], d[1], d[2]))
            return (np.array(ts), np.array(xs), np.array(ds), te)
        f = nxt[0]; s = nxt[1]; v = nxt[2]
        t += step
        _rhs(f, s, v, _interp(t, ugrid, uvals), p, d)
        ts.append(t)
        xs.append((f, s, v))
        ds.append((d[0], d[1], d[2]))
    return (np.array(ts), np.array(xs), np.array(ds), float("nan"))
