"""Benchmark: compiled kernel vs pure-Python fallback.

Times the coupled-dipole stepping loop (the hot path: one retarded-time
Newton solve + field evaluation per source charge per step) and the
single-point field evaluation, on both backends.

Run:  python benchmarks/bench_backends.py [n_steps]
"""

import math
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np

import dipolesim as ds
from dipolesim._backend import available_backends, get_backend


def pair_args(n_steps):
    p = ds.derive_dipole_params(10 * ds.CODATA.e, 1e-9, 2 * math.pi * 200e12)
    R0 = 50e-9
    qs = np.array([p.q] * 2)
    ms = np.array([p.m_eff] * 2)
    w0 = np.array([p.omega0] * 2)
    gm = np.array([p.gamma0] * 2)
    pol = np.array([[0.0, 1.0, 0.0]] * 2)
    base = np.array([[R0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    amp = np.array([0.1 * R0, 0.0])
    d = np.array([0, p.d0, 0])
    g12 = ds.coupling_rates(d, d, [R0, 0, 0], [0, 0, 0], p.omega0).g12
    omg = np.array([g12, 0.0])
    pha = np.zeros(2)
    ax = np.array([[1.0, 0.0, 0.0]] * 2)
    yi = np.array([p.y0, 1e-6 * p.y0])
    ydi = np.zeros(2)
    return (qs, ms, w0, gm, pol, base, amp, omg, pha, ax, yi, ydi,
            1e-17, n_steps, 10, 8192, ds.CODATA.c / 100, False)


def bench_loop(backend, n_steps):
    mod = get_backend(backend)
    args = pair_args(n_steps)
    t0 = time.perf_counter()
    out = mod.run_coupled(*args)
    dt = time.perf_counter() - t0
    return dt, out


def bench_point_eval(backend, n_eval=2000):
    mod = get_backend(backend)
    w0 = 2 * math.pi * 200e12
    dt = 1e-17
    n = 4000
    t_grid = np.arange(n) * dt
    r = np.zeros((n, 3))
    v = np.zeros((n, 3))
    a = np.zeros((n, 3))
    r[:, 1] = 0.5e-9 * np.sin(w0 * t_grid)
    v[:, 1] = 0.5e-9 * w0 * np.cos(w0 * t_grid)
    a[:, 1] = -0.5e-9 * w0 * w0 * np.sin(w0 * t_grid)
    args = (r.reshape(-1), v.reshape(-1), a.reshape(-1), n, 0.0, dt,
            0.0, 0.0, 0.0, True)
    t0 = time.perf_counter()
    for i in range(n_eval):
        mod.lw_eval(1e-18, *args, 3e-8, 1e-9 * (i % 7), 0.0, 3500 * dt)
    return (time.perf_counter() - t0) / n_eval


def main():
    n_steps = int(float(sys.argv[1])) if len(sys.argv) > 1 else 100_000
    backends = available_backends()
    print(f"available backends: {backends}")
    print(f"\ncoupled pair, {n_steps} steps (driven, dt = 1e-17 s):")
    results = {}
    ref_out = None
    for b in backends:
        elapsed, out = bench_loop(b, n_steps)
        results[b] = elapsed
        print(f"  {b:10s} {elapsed:8.3f} s   {elapsed / n_steps * 1e6:8.3f} us/step")
        if ref_out is None:
            ref_out = out
        else:
            same = np.array_equal(ref_out["y"], out["y"])
            print(f"             outputs bitwise identical: {same}")
    if len(results) == 2:
        speedup = results["python"] / results["compiled"]
        print(f"  speedup: {speedup:.0f}x")
    print("\nsingle field evaluation (Newton retarded solve + fields):")
    for b in backends:
        per = bench_point_eval(b)
        print(f"  {b:10s} {per * 1e6:8.2f} us/eval")


if __name__ == "__main__":
    main()
