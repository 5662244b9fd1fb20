"""Timing comparison of the compiled RK4 kernels vs the pure-Python
fallback on identical workloads, with a bit-identity cross-check.

Run as: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from agrospray._kernels import COMPILED, _fallback
from agrospray.model import ModelParams

try:
    from agrospray._kernels import _core
except ImportError:
    _core = None


def _workload(T=50.0, dt=0.01):
    par = ModelParams().as_array()
    grid = dt * np.arange(int(T / dt) + 1)
    rng = np.random.default_rng(1234)
    coarse = np.linspace(0.0, T, 26)
    uvals = np.interp(grid, coarse, rng.uniform(0.0, 0.05, coarse.size))
    x0 = np.array([3.1, 3.7, 2.2])
    return grid, x0, uvals, par


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    grid, x0, uvals, par = _workload()
    print(f"grid: {grid.size} nodes, compiled extension available: "
          f"{_core is not None} (import selected compiled: {COMPILED})")

    results = {}
    for name, mod in [("fallback", _fallback)] + (
            [("compiled", _core)] if _core is not None else []):
        states, derivs = mod.forward(grid, x0, grid, uvals, par)
        terminal = np.zeros(3)
        fwd = _time(lambda m=mod: m.forward(grid, x0, grid, uvals, par),
                    repeats=3 if mod is _fallback else 20)
        bwd = _time(lambda m=mod: m.backward(grid, states, derivs,
                                             terminal, 1.0, par),
                    repeats=3 if mod is _fallback else 20)
        evt = _time(lambda m=mod: m.forward_event(
            x0, 0.01, 50.0, grid, np.ones_like(grid), par, 1e-8),
            repeats=3 if mod is _fallback else 20)
        results[name] = (fwd, bwd, evt, states, derivs)
        print(f"{name:9s} forward {fwd * 1e3:8.2f} ms   "
              f"backward {bwd * 1e3:8.2f} ms   event {evt * 1e3:8.2f} ms")

    if _core is not None:
        sf, df = results["fallback"][3], results["fallback"][4]
        sc, dc = results["compiled"][3], results["compiled"][4]
        identical = np.array_equal(sf, sc) and np.array_equal(df, dc)
        print(f"bit-identical forward results: {identical}")
        speedup = results["fallback"][0] / results["compiled"][0]
        print(f"forward speedup: {speedup:.1f}x")


if __name__ == "__main__":
    main()
