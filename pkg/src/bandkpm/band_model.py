"""Random band matrix ensemble on the integer lattice.

The operator acts on sites u with |u| <= N.  Off-diagonal entries H(u, v)
for 0 < |u - v| <= W are independent symmetric signs scaled by
1/(2 sqrt(2W - 1)); the diagonal is zero.  Signs come from a counter-based
hash of (seed, u, v), so a realization is a deterministic function of the
spec and enlarging N extends a realization without resampling it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend


@dataclass(frozen=True)
class BandMatrixSpec:
    """Parameters of one ensemble draw: band width, truncation radius, seed."""

    W: int
    N: int
    seed: int

    def __post_init__(self):
        if self.W < 1:
            raise ValueError(f"band width must be >= 1, got {self.W}")
        if self.N < self.W:
            raise ValueError(f"truncation radius N={self.N} must be >= W={self.W}")
        if not (0 <= self.seed <= backend.MASK64):
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def size(self) -> int:
        """Number of lattice sites, 2N + 1."""
        return 2 * self.N + 1

    @property
    def entry_scale(self) -> float:
        """Magnitude of every nonzero entry, 1/(2 sqrt(2W - 1))."""
        return 1.0 / (2.0 * np.sqrt(2.0 * self.W - 1.0))

    @property
    def norm_bound(self) -> float:
        """Row-sum bound on the operator norm, W / sqrt(2W - 1)."""
        return self.W / np.sqrt(2.0 * self.W - 1.0)


@dataclass(frozen=True)
class SampledBandMatrix:
    """One realization: the spec plus its sign table.

    ``signs[d-1, i]`` is the sign of the edge (i-N, i-N+d).  Only the
    upper triangle is stored; symmetry, the zero diagonal and the band
    structure hold by construction.
    """

    spec: BandMatrixSpec
    signs: np.ndarray = field(repr=False)

    def entry(self, u: int, v: int) -> float:
        """H(u, v); zero on the diagonal and outside the band."""
        N, W = self.spec.N, self.spec.W
        if max(abs(u), abs(v)) > N:
            raise IndexError(f"site out of range: ({u}, {v}) with N={N}")
        d = abs(u - v)
        if d == 0 or d > W:
            return 0.0
        lo = min(u, v)
        return float(self.signs[d - 1, lo + N]) * self.spec.entry_scale

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """Apply the operator to a vector of length 2N + 1."""
        if x.shape != (self.spec.size,):
            raise ValueError(f"expected shape ({self.spec.size},), got {x.shape}")
        return backend.banded_sign_matvec(
            self.signs, np.asarray(x, dtype=np.float64), self.spec.W,
            self.spec.entry_scale,
        )

    def to_dense(self) -> np.ndarray:
        """Dense matrix, for small-N checks only."""
        L, W, N = self.spec.size, self.spec.W, self.spec.N
        H = np.zeros((L, L))
        scale = self.spec.entry_scale
        for d in range(1, W + 1):
            vals = self.signs[d - 1, : L - d] * scale
            H[np.arange(L - d), np.arange(d, L)] = vals
            H[np.arange(d, L), np.arange(L - d)] = vals
        return H


def sample_matrix(spec: BandMatrixSpec) -> SampledBandMatrix:
    """Draw the realization determined by the spec."""
    return SampledBandMatrix(spec, backend.edge_signs(spec.seed, spec.N, spec.W))


def truncation_radius_for_degree(n: int, W: int) -> int:
    """Radius with one band of margin beyond the reach of a degree-n walk.

    A length-n walk from the origin reaches at most n*W, so any N >= n*W
    makes degree-n polynomial values at (0, 0) exact; n*W + W adds margin.
    """
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    if W < 1:
        raise ValueError(f"band width must be >= 1, got {W}")
    return n * W + W
