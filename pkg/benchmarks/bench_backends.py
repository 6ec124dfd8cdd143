#!/usr/bin/env python3
"""Timing comparison of the numpy and numba compute kernels.

Runs the same workloads against both implementations and prints the
per-call time and speedup.  The numba functions are called once before
timing so compilation is not counted.
"""

import sys
import time

import numpy as np

from bandkpm import _kernels_numpy as knp

try:
    from bandkpm import _kernels_numba as knb
    HAS_NUMBA = True
except ImportError:
    knb = None
    HAS_NUMBA = False


def time_call(func, *args, iterations=5):
    func(*args)  # warmup (and JIT compile for the numba path)
    best = float("inf")
    for _ in range(iterations):
        start = time.perf_counter()
        func(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    N, W, max_degree, samples = 800, 8, 40, 200
    if len(sys.argv) > 1:
        samples = int(sys.argv[1])
    seed = 12345
    signs = knp.edge_signs(seed, N, W)
    x = np.zeros(2 * N + 1)
    x[N] = 1.0
    scale = 1.0 / (2.0 * np.sqrt(2.0 * W - 1.0))

    workloads = [
        ("edge_signs (N=%d, W=%d)" % (N, W),
         lambda k: k.edge_signs(seed, N, W)),
        ("banded matvec (N=%d, W=%d)" % (N, W),
         lambda k: k.banded_sign_matvec(signs, x, W, scale)),
        ("u_series_00 (deg=%d)" % max_degree,
         lambda k: k.u_series_00(signs, N, W, scale, max_degree)),
        ("sample_u_series (%d samples)" % samples,
         lambda k: k.sample_u_series(seed, samples, N, W, max_degree)),
    ]

    print(f"{'workload':<34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, call in workloads:
        t_np = time_call(call, knp)
        if HAS_NUMBA:
            t_nb = time_call(call, knb)
            print(f"{name:<34} {t_np * 1e3:8.2f}ms {t_nb * 1e3:8.2f}ms "
                  f"{t_np / t_nb:7.1f}x")
        else:
            print(f"{name:<34} {t_np * 1e3:8.2f}ms {'n/a':>10} {'':>8}")
    if not HAS_NUMBA:
        print("numba not importable; only the numpy path was timed")


if __name__ == "__main__":
    main()
