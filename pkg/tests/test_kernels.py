"""Kernel-level tests: compiled/fallback agreement, blow-up signalling
and closed-form backward/event oracles."""

import math

import numpy as np
import pytest

from agrospray._kernels import _fallback
from agrospray.model import ModelParams

try:
    from agrospray._kernels import _core
except ImportError:
    _core = None

PAR = ModelParams().as_array()
X0 = np.array([3.1, 3.7, 2.2])


def _smooth_control(grid, seed=0, lo=0.0, hi=0.3):
    rng = np.random.default_rng(seed)
    coarse = np.linspace(grid[0], grid[-1], 26)
    return np.interp(grid, coarse, rng.uniform(lo, hi, coarse.size))


@pytest.mark.skipif(_core is None, reason="compiled kernel unavailable")
class TestCompiledMatchesFallback:
    def test_forward_bit_identical(self):
        grid = 0.01 * np.arange(2001)
        uv = _smooth_control(grid)
        sf, df = _fallback.forward(grid, X0, grid, uv, PAR)
        sc, dc = _core.forward(grid, X0, grid, uv, PAR)
        assert np.array_equal(sf, sc)
        assert np.array_equal(df, dc)

    def test_backward_bit_identical(self):
        grid = 0.01 * np.arange(1001)
        uv = _smooth_control(grid, seed=1)
        states, derivs = _fallback.forward(grid, X0, grid, uv, PAR)
        terminal = np.array([0.2, -0.1, 0.4])
        af = _fallback.backward(grid, states, derivs, terminal, 1.0, PAR)
        ac = _core.backward(grid, states, derivs, terminal, 1.0, PAR)
        assert np.array_equal(af, ac)

    def test_event_bit_identical(self):
        ug = np.array([0.0, 50.0])
        uv = np.array([1.0, 1.0])
        rf = _fallback.forward_event(X0, 0.01, 50.0, ug, uv, PAR, 1e-8)
        rc = _core.forward_event(X0, 0.01, 50.0, ug, uv, PAR, 1e-8)
        for a, b in zip(rf[:3], rc[:3]):
            assert np.array_equal(a, b)
        assert rf[3] == rc[3]


@pytest.mark.parametrize("kernel", [_fallback] + ([] if _core is None
                                                  else [_core]))
class TestKernelContracts:
    def test_forward_blowup_raises_with_time(self, kernel):
        # push v negative with full spray; the logistic term then
        # drives the magnitude beyond any bound
        grid = 0.01 * np.arange(20001)
        uv = np.ones_like(grid)
        with pytest.raises(ArithmeticError) as err:
            kernel.forward(grid, X0, grid, uv, PAR)
        assert isinstance(err.value.args[1], float)

    def test_backward_linear_closed_form(self, kernel):
        # along x = 0 the costate system decouples:
        #   l1' = -r l1, l2' = a l2, l3' = -cost - e l3
        T, dt = 2.0, 0.001
        grid = dt * np.arange(int(T / dt) + 1)
        states = np.zeros((grid.size, 3))
        derivs = np.zeros((grid.size, 3))
        terminal = np.array([0.7, -0.3, 0.5])
        cost = 1.0
        adj = kernel.backward(grid, states, derivs, terminal, cost, PAR)
        r, e, a = PAR[0], PAR[1], PAR[2]
        tau = T - grid   # time to go
        l1 = terminal[0] * np.exp(r * tau)
        l2 = terminal[1] * np.exp(-a * tau)
        l3 = (terminal[2] + cost / e) * np.exp(e * tau) - cost / e
        assert np.allclose(adj[:, 0], l1, rtol=1e-9, atol=1e-10)
        assert np.allclose(adj[:, 1], l2, rtol=1e-9, atol=1e-10)
        assert np.allclose(adj[:, 2], l3, rtol=1e-8, atol=1e-8)

    def test_event_location_linear_decay(self, kernel):
        # with e = b = 0 and q = 1 the pest equation is v' = -h u,
        # so full spray crosses zero exactly at v0 / h
        p = ModelParams(e=0.0, b=0.0, c=0.0, q=1.0, K=0.0)
        par = p.as_array()
        x0 = np.array([1.0, 1.0, 0.5])
        ug = np.array([0.0, 10.0])
        uv = np.array([1.0, 1.0])
        t, states, derivs, te = kernel.forward_event(
            x0, 0.01, 10.0, ug, uv, par, 1e-12)
        assert te == pytest.approx(0.5 / p.h, abs=1e-8)
        assert abs(states[-1, 2]) <= 1e-12

    def test_event_none_when_v_stays_positive(self, kernel):
        ug = np.array([0.0, 10.0])
        uv = np.array([0.0, 0.0])
        t, states, derivs, te = kernel.forward_event(
            X0, 0.01, 10.0, ug, uv, PAR, 1e-8)
        assert math.isnan(te)
        assert t[-1] == pytest.approx(10.0)

    def test_event_immediate_for_nonpositive_v(self, kernel):
        ug = np.array([0.0, 1.0])
        uv = np.array([0.0, 0.0])
        x0 = np.array([1.0, 1.0, 0.0])
        t, states, derivs, te = kernel.forward_event(
            x0, 0.01, 1.0, ug, uv, PAR, 1e-8)
        assert te == 0.0
        assert t.size == 1
