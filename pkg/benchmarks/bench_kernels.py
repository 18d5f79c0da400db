"""Benchmark the numba kernels against their pure numpy / python fallbacks.

    python benchmarks/bench_kernels.py [--pairs N] [--repeat R]

Batch Dubins lengths are timed three ways (numba loop, vectorised numpy,
plain python loop over the un-jitted kernel). A full simulation run is timed
in a subprocess with and without ARSIM_DISABLE_NUMBA.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from arsim import kernels as K


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def python_lengths(poses, radius):
    best = getattr(K.dubins_best, "py_func", K.dubins_best)
    out = np.empty(len(poses))
    for i, (sx, sy, sp, gx, gy, gp) in enumerate(poses):
        _, t, p, q = best(sx, sy, sp, gx, gy, gp, radius)
        out[i] = t + p + q
    return out


# the first run in a process pays for loading the cached kernels; time the second
RUN_SNIPPET = (
    "import time; from arsim import engine as E; E.run(E.ScenarioConfig()); "
    "t0=time.perf_counter(); E.run(E.ScenarioConfig()); print(time.perf_counter()-t0)"
)


def time_run(disable):
    env = dict(os.environ, ARSIM_DISABLE_NUMBA="1" if disable else "0")
    for _ in range(2):  # first pass populates the on-disk cache
        out = subprocess.run([sys.executable, "-c", RUN_SNIPPET], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-run", action="store_true")
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    n = args.pairs
    poses = np.column_stack([
        rng.uniform(-5e3, 5e3, n), rng.uniform(-5e3, 5e3, n), rng.uniform(0, 2 * np.pi, n),
        rng.uniform(-5e3, 5e3, n), rng.uniform(-5e3, 5e3, n), rng.uniform(0, 2 * np.pi, n),
    ])
    radius = 1500.0

    print(f"numba available: {K.HAVE_NUMBA}")
    rows = []
    if K.HAVE_NUMBA:
        K._dubins_lengths_loop(poses[:2], radius)  # compile
        t_nb, ref = best_of(lambda: K._dubins_lengths_loop(poses, radius), args.repeat)
        rows.append(("numba loop", t_nb))
    t_np, out_np = best_of(lambda: K.dubins_lengths_numpy(poses, radius), args.repeat)
    rows.append(("numpy vectorised", t_np))
    m = min(n, 2000)
    t_py, out_py = best_of(lambda: python_lengths(poses[:m], radius), 1)
    rows.append(("python loop (scaled)", t_py * n / m))
    if K.HAVE_NUMBA:
        print(f"max |numba - numpy| = {np.max(np.abs(ref - out_np)):.2e}")
        print(f"max |numba - python| = {np.max(np.abs(ref[:m] - out_py)):.2e}")

    print(f"\nDubins shortest length, {n} pose pairs")
    base = rows[0][1]
    for name, t in rows:
        print(f"  {name:<22s} {t * 1e3:9.2f} ms  x{t / base:6.1f}")

    if not args.skip_run:
        t_on = time_run(disable=False)
        t_off = time_run(disable=True)
        print("\nfull run, T_s=90 d=4 (ARS)")
        print(f"  numba      {t_on:7.2f} s")
        print(f"  fallback   {t_off:7.2f} s  x{t_off / t_on:5.1f}")
        print("  (scalar kernels are called once per aircraft tick, so interpreter overhead dominates)")


if __name__ == "__main__":
    main()
