#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Times every hot kernel on representative workloads and prints a table with
the speedup.  The numba path is warmed (and numerically cross-checked
against the numpy path) before timing.

Usage:
    python benchmarks/bench_kernels.py [--repeats N] [--grid G]
"""

import argparse
import time

import numpy as np

from setensor import _kernels_np
from setensor.m_eigen import unit_circle_grid
from setensor.tensor_core import identity_entries, orbit_average

try:
    from setensor import _kernels_nb
except ImportError:
    _kernels_nb = None


def sample_tensor(n, seed=0):
    rng = np.random.default_rng(seed)
    return np.ascontiguousarray(orbit_average(rng.standard_normal((n, n, n, n))))


def psd_feasible_tensor(n, seed=0):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((n * n, n * n))
    M = M @ M.T
    weak = np.ascontiguousarray(
        M.reshape(n, n, n, n).transpose(1, 3, 0, 2)
    )
    return np.ascontiguousarray(orbit_average(weak))


def timeit(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def build_cases(grid):
    a2 = sample_tensor(2)
    a3 = sample_tensor(3)
    a2_shift = np.ascontiguousarray(
        a2 + (1.0 + np.abs(a2).sum()) * identity_entries(2)
    )
    rng = np.random.default_rng(1)
    Xb = rng.standard_normal((100000, 2))
    Yb = rng.standard_normal((100000, 2))
    Xg2 = unit_circle_grid(grid)
    Xn = rng.standard_normal((500, 2))
    Xn /= np.linalg.norm(Xn, axis=1, keepdims=True)
    Yn = rng.standard_normal((500, 2))
    Yn /= np.linalg.norm(Yn, axis=1, keepdims=True)
    pocs_target = psd_feasible_tensor(3)

    def arrays_close(ref, got):
        return np.allclose(ref, got, atol=1e-10)

    def grids_close(ref, got):
        return all(np.allclose(r, g, atol=1e-10) for r, g in zip(ref, got))

    def power_close(ref, got):
        # iteration counts may differ by rounding; the eigenpair must not
        return (abs(ref[0] - got[0]) < 1e-8
                and np.allclose(ref[1], got[1], atol=1e-8)
                and np.allclose(ref[2], got[2], atol=1e-8))

    def newton_close(ref, got):
        # wandering seeds may land on different (still valid) roots, so the
        # contract is: identical convergence decisions and valid residuals
        return (np.array_equal(ref[5], got[5])
                and ref[4][ref[5] == 1].max(initial=0.0) <= 1e-12
                and got[4][got[5] == 1].max(initial=0.0) <= 1e-12)

    def pocs_close(ref, got):
        return (ref[4] == got[4] and ref[3] == got[3]
                and np.allclose(ref[2], got[2], atol=1e-8))

    return [
        ("biquadratic_batch (100k pairs, n=2)",
         lambda k: k.biquadratic_batch(a2, Xb, Yb), arrays_close),
        (f"kkt_residual_grid ({grid}x{grid}, n=2)",
         lambda k: k.kkt_residual_grid(a2, Xg2, Xg2), grids_close),
        ("wqz_power (10k iterations cap, n=2)",
         lambda k: k.wqz_power(a2_shift, np.ones(2), np.ones(2), 10000, 1e-14),
         power_close),
        ("newton_refine_batch (500 seeds, n=2)",
         lambda k: k.newton_refine_batch(a2, Xn, Yn, 60, 1e-12), newton_close),
        ("pocs_run (2000 iterations cap, n=3)",
         lambda k: k.pocs_run(pocs_target, 2000, 0.0, 10**9, 0.0), pocs_close),
    ]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repetitions, best-of (default: 5)")
    parser.add_argument("--grid", type=int, default=360,
                        help="angle grid size for the scan case (default: 360)")
    args = parser.parse_args()

    cases = build_cases(args.grid)
    if _kernels_nb is None:
        print("numba unavailable: timing the numpy fallback only\n")
    else:
        print("warming and cross-checking the numba kernels...")
        for name, fn, check in cases:
            ref = fn(_kernels_np)
            got = fn(_kernels_nb)
            assert check(ref, got), f"backend disagreement in {name}"
        print("agreement checks passed\n")

    header = f"{'kernel':45s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for name, fn, _check in cases:
        t_np = timeit(lambda: fn(_kernels_np), args.repeats)
        if _kernels_nb is not None:
            t_nb = timeit(lambda: fn(_kernels_nb), args.repeats)
            print(f"{name:45s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms "
                  f"{t_np / t_nb:7.1f}x")
        else:
            print(f"{name:45s} {t_np * 1e3:9.2f}ms {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
