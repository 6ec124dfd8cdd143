"""Chebyshev polynomials of the band matrix, evaluated at the origin.

Three families are supported: first kind T_n, second kind U_n, and the
band-corrected combination

    U_{n,W} = U_n - U_{n-2} / (2W - 1),      U_{-1} = U_{-2} = 0,

whose ensemble average at (0, 0) is exactly (2W-1)^{-n/2} times the
non-backtracking path count (see :mod:`bandkpm.path_oracle`).  All values
at (0, 0) derive from a single U-vector recursion, using
T_n = (U_n - U_{n-2}) / 2 for n >= 1.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import backend
from .band_model import BandMatrixSpec, SampledBandMatrix

KINDS = ("T", "U", "U_nW")


def cheb_eval(kind: str, n: int, x: float) -> float:
    """Scalar Chebyshev value by the three-term recursion.

    U accepts n >= -2 with U_{-1} = U_{-2} = 0; T requires n >= 0.
    """
    if kind == "T":
        if n < 0:
            raise ValueError(f"T_n needs n >= 0, got {n}")
        prev, cur = 1.0, float(x)
        if n == 0:
            return prev
        for _ in range(n - 1):
            prev, cur = cur, 2.0 * x * cur - prev
        return cur
    if kind == "U":
        if n < -2:
            raise ValueError(f"U_n needs n >= -2, got {n}")
        if n < 0:
            return 0.0
        prev, cur = 1.0, 2.0 * float(x)
        if n == 0:
            return prev
        for _ in range(n - 1):
            prev, cur = cur, 2.0 * x * cur - prev
        return cur
    raise ValueError(f"kind must be 'T' or 'U', got {kind!r}")


@dataclass(frozen=True)
class MomentSeries:
    """Monte Carlo moments of one Chebyshev family at (0, 0)."""

    kind: str
    W: int
    max_degree: int
    values: np.ndarray
    std_errors: np.ndarray
    sample_count: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.values.shape != (self.max_degree + 1,):
            raise ValueError("values must have length max_degree + 1")
        if self.std_errors.shape != self.values.shape:
            raise ValueError("std_errors must match values in length")

    def soft_bound_violations(self, sigmas: float = 3.0) -> list[int]:
        """Degrees where a T moment exceeds 1 + sigmas * stderr.

        Advisory only: the spectrum sticks out of [-1, 1] by O(1/W), so
        T values may legitimately drift slightly past 1 at large degree.
        """
        if self.kind != "T":
            return []
        bad = np.abs(self.values) > 1.0 + sigmas * self.std_errors
        return [int(n) for n in np.nonzero(bad)[0]]


def _series_to_kind(u_rows: np.ndarray, kind: str, W: int) -> np.ndarray:
    """Map per-sample U_n(H)(0,0) rows to the requested family."""
    if kind == "U":
        return u_rows
    if kind not in ("T", "U_nW"):
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    out = np.empty_like(u_rows)
    out[:, 0] = 1.0
    if kind == "T":
        if u_rows.shape[1] > 1:
            out[:, 1] = u_rows[:, 1] / 2.0
        if u_rows.shape[1] > 2:
            out[:, 2:] = (u_rows[:, 2:] - u_rows[:, :-2]) / 2.0
    else:
        if u_rows.shape[1] > 1:
            out[:, 1] = u_rows[:, 1]
        if u_rows.shape[1] > 2:
            out[:, 2:] = u_rows[:, 2:] - u_rows[:, :-2] / (2.0 * W - 1.0)
    return out


def poly_of_H_at_00(m: SampledBandMatrix, kind: str, n: int) -> float:
    """Exact polynomial value p_n(H)(0, 0) for one realization.

    Requires N >= n*W so the truncation cannot be felt at the origin.
    """
    spec = m.spec
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    if spec.N < n * spec.W:
        raise ValueError(
            f"N={spec.N} too small for degree {n} at W={spec.W}; "
            f"need N >= {n * spec.W}"
        )
    u = backend.u_series_00(m.signs, spec.N, spec.W, spec.entry_scale, n)
    if kind == "U":
        return float(u[n])
    if kind == "T":
        if n == 0:
            return 1.0
        lower = u[n - 2] if n >= 2 else 0.0
        return float((u[n] - lower) / 2.0)
    if kind == "U_nW":
        lower = u[n - 2] if n >= 2 else 0.0
        return float(u[n] - lower / (2.0 * spec.W - 1.0))
    raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def sample_value_rows(spec: BandMatrixSpec, kind: str, max_degree: int,
                      samples: int) -> np.ndarray:
    """Per-sample value matrix (samples, max_degree+1) for one family.

    Row i is the realization with seed derive_seed(spec.seed, i), so the
    result is a pure function of (spec, kind, max_degree, samples).
    """
    if samples < 1:
        raise ValueError(f"samples must be >= 1, got {samples}")
    if spec.N < max_degree * spec.W:
        raise ValueError(
            f"N={spec.N} too small for max_degree={max_degree} at W={spec.W}"
        )
    u_rows = backend.sample_u_series(spec.seed, samples, spec.N, spec.W, max_degree)
    return _series_to_kind(u_rows, kind, spec.W)


def estimate_moments(spec: BandMatrixSpec, kind: str, max_degree: int,
                     samples: int) -> MomentSeries:
    """Monte Carlo moment estimate with per-degree standard errors."""
    rows = sample_value_rows(spec, kind, max_degree, samples)
    values = rows.mean(axis=0)
    if samples > 1:
        std_errors = rows.std(axis=0, ddof=1) / np.sqrt(samples)
    else:
        std_errors = np.zeros_like(values)
    series = MomentSeries(kind, spec.W, max_degree, values, std_errors,
                          samples, spec.seed)
    bad = series.soft_bound_violations()
    if bad:
        warnings.warn(
            f"T moments exceed the soft bound |value| <= 1 + 3*stderr at "
            f"degrees {bad[:8]} (W={spec.W}); spectral leakage past [-1, 1] "
            f"is O(1/W) and grows with degree",
            stacklevel=2,
        )
    return series


def estimate_weighted_sum(spec: BandMatrixSpec, coeffs: np.ndarray,
                          samples: int, kind: str = "T") -> tuple[float, float]:
    """Mean and stderr of sum_n coeffs[n] * p_n(H)(0,0) over realizations.

    The weighted sum is formed per sample before averaging, so the
    standard error accounts for correlations between degrees.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    rows = sample_value_rows(spec, kind, len(coeffs) - 1, samples)
    per_sample = rows @ coeffs
    mean = float(per_sample.mean())
    if samples > 1:
        err = float(per_sample.std(ddof=1) / np.sqrt(samples))
    else:
        err = 0.0
    return mean, err
