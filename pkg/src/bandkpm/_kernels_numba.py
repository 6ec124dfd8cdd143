"""numba @njit implementations of the hot kernels.

Selected by default when numba imports (see :mod:`bandkpm.backend`).  The
arithmetic matches :mod:`bandkpm._kernels_numpy` operation-for-operation so
both backends give bit-identical results; kernels are compiled without
fastmath for that reason.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = 0xFFFFFFFFFFFFFFFF

_jit = {"cache": True, "nogil": True}


@njit(**_jit)
def _mix64(z):
    z = z + np.uint64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(**_jit)
def _edge_signs(seed, N, W):
    L = 2 * N + 1
    out = np.zeros((W, L), dtype=np.int8)
    s0 = _mix64(seed)
    for d in range(1, W + 1):
        for i in range(L - d):
            u = np.uint64(np.int64(i - N))
            v = np.uint64(np.int64(i - N + d))
            h = _mix64(_mix64(s0 ^ u) ^ v)
            out[d - 1, i] = np.int8((np.int64(h >> np.uint64(63)) << 1) - 1)
    return out


@njit(**_jit)
def _u_series_00(signs, N, W, scale, max_degree, vals):
    L = 2 * N + 1
    vals[0] = 1.0
    if max_degree == 0:
        return
    u_prev = np.zeros(L)
    u_cur = np.zeros(L)
    u_cur[N] = 1.0
    work = np.zeros(L)
    for k in range(1, max_degree + 1):
        for j in range(L):
            work[j] = 0.0
        for d in range(1, W + 1):
            for i in range(L - d):
                work[i] += signs[d - 1, i] * u_cur[i + d]
            for i in range(d, L):
                work[i] += signs[d - 1, i - d] * u_cur[i - d]
        for j in range(L):
            h = work[j] * scale
            h = h * 2.0
            work[j] = h - u_prev[j]
        tmp = u_prev
        u_prev = u_cur
        u_cur = work
        work = tmp
        vals[k] = u_cur[N]


@njit(**_jit)
def _sample_u_series(master_seed, samples, N, W, max_degree):
    rows = np.empty((samples, max_degree + 1))
    scale = 1.0 / (2.0 * np.sqrt(2.0 * W - 1.0))
    for i in range(samples):
        seed_i = _mix64(_mix64(master_seed) ^ np.uint64(i))
        signs = _edge_signs(seed_i, N, W)
        _u_series_00(signs, N, W, scale, max_degree, rows[i])
    return rows


def derive_seed(master: int, index: int) -> int:
    return int(_mix64(_mix64(np.uint64(master & MASK64)) ^ np.uint64(index)))


def edge_sign(seed: int, u: int, v: int) -> int:
    s0 = _mix64(np.uint64(seed & MASK64))
    h = _mix64(_mix64(s0 ^ np.uint64(np.int64(u))) ^ np.uint64(np.int64(v)))
    return 1 if int(h >> np.uint64(63)) else -1


def edge_signs(seed: int, N: int, W: int) -> np.ndarray:
    return _edge_signs(np.uint64(seed & MASK64), N, W)


def banded_sign_matvec(signs, x, W, scale, out=None):
    if out is None:
        out = np.empty(x.shape[0], dtype=np.float64)
    _banded_sign_matvec(signs, x, W, scale, out)
    return out


@njit(**_jit)
def _banded_sign_matvec(signs, x, W, scale, out):
    L = x.shape[0]
    for j in range(L):
        out[j] = 0.0
    for d in range(1, W + 1):
        for i in range(L - d):
            out[i] += signs[d - 1, i] * x[i + d]
        for i in range(d, L):
            out[i] += signs[d - 1, i - d] * x[i - d]
    for j in range(L):
        out[j] *= scale


def u_series_00(signs, N, W, scale, max_degree):
    vals = np.empty(max_degree + 1)
    _u_series_00(signs, N, W, scale, max_degree, vals)
    return vals


def sample_u_series(master_seed, samples, N, W, max_degree):
    return _sample_u_series(np.uint64(master_seed & MASK64), samples, N, W, max_degree)
