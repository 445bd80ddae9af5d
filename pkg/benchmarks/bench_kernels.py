"""Compiled vs numpy lattice kernel, and how V0 converges with the lattice cutoff.

    python benchmarks/bench_kernels.py [--points 2000] [--repeat 5]

The first table times ``lattice_moments`` from both backends on the same
inputs and reports the largest disagreement. The second compares the
lattice value of V0 at several cutoffs against the Bessel series, with
and without the analytic tail.
"""
import argparse
import time

import numpy as np

from hkcollapse import _lattice_py
from hkcollapse import ooguri_vafa as ov

try:
    from hkcollapse import _lattice
except ImportError:
    _lattice = None


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def kernel_table(points, repeat):
    rng = np.random.default_rng(0)
    eps = 0.2
    u = rng.uniform(0, eps, points)
    rho2 = rng.uniform(0.02, 0.8, points) ** 2
    print("%-8s %-6s %12s %12s %9s %12s" % ("N", "kmax", "python [s]", "cython [s]", "speedup", "max rel diff"))
    for N in (64, 256, 1024):
        for kmax in (0, 4):
            def py():
                return _lattice_py.lattice_moments(u, rho2, eps, N, kmax)
            tp = best_of(py, repeat)
            if _lattice is None:
                print("%-8d %-6d %12.4g %12s %9s %12s" % (N, kmax, tp, "n/a", "n/a", "n/a"))
                continue

            def cy():
                return _lattice.lattice_moments(u, rho2, eps, N, kmax)
            tc = best_of(cy, repeat)
            a, b = py(), cy()
            # high-order moments reach 1e15 near small rho, so compare relatively
            diff = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1.0))
            print("%-8d %-6d %12.4g %12.4g %9.1f %12.3g" % (N, kmax, tp, tc, tp / tc, diff))


def cutoff_table():
    eps = 0.5
    rng = np.random.default_rng(1)
    y = rng.uniform(0.2, 0.9, 64) * np.exp(2j * np.pi * rng.random(64))
    u = rng.uniform(0, eps, 64)
    ref = ov.v0_bessel(u, y, eps)
    print("\n%-8s %18s %18s" % ("j_max", "with tail", "bare sum"))
    for N in (16, 32, 64, 128, 256, 512):
        a = np.max(np.abs(ov.v0_lattice(u, y, eps, N) - ref))
        b = np.max(np.abs(ov.v0_lattice(u, y, eps, N, accelerate=False) - ref))
        print("%-8d %18.3e %18.3e" % (N, a, b))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=5)
    a = p.parse_args()
    kernel_table(a.points, a.repeat)
    cutoff_table()


if __name__ == "__main__":
    main()
