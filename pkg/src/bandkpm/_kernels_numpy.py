"""Pure-numpy implementations of the hot kernels.

These are the fallback path selected by ``BANDKPM_BACKEND=numpy``.  They are
written to be arithmetic-order compatible with the numba versions in
:mod:`bandkpm._kernels_numba`: same splitmix64 chain, same per-element
accumulation order in the banded matvec, so that both backends produce
bit-identical sign arrays and moment samples.
"""
from __future__ import annotations

import numpy as np

# splitmix64 constants
_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S63 = np.uint64(63)
MASK64 = 0xFFFFFFFFFFFFFFFF


def mix64(z):
    """splitmix64 finalizer, on uint64 scalars or arrays (wraps mod 2**64)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + _GOLD
        z = (z ^ (z >> _S30)) * _MUL1
        z = (z ^ (z >> _S27)) * _MUL2
        return z ^ (z >> _S31)


def derive_seed(master: int, index: int) -> int:
    """Per-sample seed: hash of (master seed, sample index)."""
    return int(mix64(mix64(np.uint64(master & MASK64)) ^ np.uint64(index)))


def edge_sign(seed: int, u: int, v: int) -> int:
    """Sign of the edge {u, v}; callers must pass u < v (canonical order)."""
    s0 = mix64(np.uint64(seed & MASK64))
    uu = np.int64(u).astype(np.uint64)
    vv = np.int64(v).astype(np.uint64)
    h = mix64(mix64(s0 ^ uu) ^ vv)
    return 1 if int(h >> _S63) else -1


def edge_signs(seed: int, N: int, W: int) -> np.ndarray:
    """Sign table for the band [-N, N].

    Entry ``[d-1, i]`` is the sign of the edge (i-N, i-N+d) for
    i <= 2N-d; the tail of each row (edges reaching past +N) stays 0.
    The hash keys on lattice coordinates only, so enlarging N extends the
    table without changing existing entries.
    """
    L = 2 * N + 1
    out = np.zeros((W, L), dtype=np.int8)
    s0 = mix64(np.uint64(seed & MASK64))
    lat = np.arange(-N, N + 1, dtype=np.int64).view(np.uint64)
    for d in range(1, W + 1):
        h = mix64(mix64(s0 ^ lat[: L - d]) ^ lat[d:])
        out[d - 1, : L - d] = ((h >> _S63).astype(np.int8) << 1) - 1
    return out


def banded_sign_matvec(signs, x, W, scale, out=None):
    """out = H @ x for the symmetric banded sign matrix scaled by `scale`."""
    L = x.shape[0]
    if out is None:
        out = np.zeros(L, dtype=np.float64)
    else:
        out[:] = 0.0
    for d in range(1, W + 1):
        s = signs[d - 1, : L - d]
        out[: L - d] += s * x[d:]
        out[d:] += s * x[: L - d]
    out *= scale
    return out


def u_series_00(signs, N, W, scale, max_degree):
    """Values U_n(H)(0,0) for n = 0..max_degree via the vector recursion."""
    L = 2 * N + 1
    vals = np.empty(max_degree + 1)
    vals[0] = 1.0
    if max_degree == 0:
        return vals
    u_prev = np.zeros(L)
    u_cur = np.zeros(L)
    u_cur[N] = 1.0
    work = np.empty(L)
    for k in range(1, max_degree + 1):
        banded_sign_matvec(signs, u_cur, W, scale, out=work)
        work *= 2.0
        work -= u_prev
        u_prev, u_cur, work = u_cur, work, u_prev
        vals[k] = u_cur[N]
    return vals


def sample_u_series(master_seed, samples, N, W, max_degree):
    """Per-sample U_n(H)(0,0) rows; row i uses seed derive_seed(master, i)."""
    rows = np.empty((samples, max_degree + 1))
    scale = 1.0 / (2.0 * np.sqrt(2.0 * W - 1.0))
    for i in range(samples):
        signs = edge_signs(derive_seed(master_seed, i), N, W)
        rows[i] = u_series_00(signs, N, W, scale, max_degree)
    return rows
