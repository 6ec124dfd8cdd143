"""Chebyshev families: scalar recursions and matrix values at the origin."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandkpm.band_model import BandMatrixSpec, sample_matrix
from bandkpm.chebyshev import (
    MomentSeries, cheb_eval, estimate_moments, estimate_weighted_sum,
    poly_of_H_at_00, sample_value_rows,
)


@settings(max_examples=80, deadline=None)
@given(n=st.integers(0, 25), x=st.floats(-0.999, 0.999))
def test_trig_closed_forms(n, x):
    th = math.acos(x)
    assert cheb_eval("T", n, x) == pytest.approx(math.cos(n * th), abs=1e-9)
    assert cheb_eval("U", n, x) == pytest.approx(
        math.sin((n + 1) * th) / math.sin(th), abs=1e-8
    )


def test_U_formal_values():
    assert cheb_eval("U", -1, 0.4) == 0.0
    assert cheb_eval("U", -2, 0.4) == 0.0
    with pytest.raises(ValueError):
        cheb_eval("T", -1, 0.4)
    with pytest.raises(ValueError):
        cheb_eval("V", 2, 0.4)


def _dense_poly_00(H, kind, n, W):
    # reference evaluation on the dense matrix via the same recursions
    L = H.shape[0]
    mid = L // 2
    I = np.eye(L)
    U = [I, 2.0 * H]
    while len(U) <= max(n, 2):
        U.append(2.0 * H @ U[-1] - U[-2])
    if kind == "U":
        M = U[n]
    elif kind == "T":
        M = I if n == 0 else (U[n] - (U[n - 2] if n >= 2 else 0.0)) / 2.0
    else:
        M = U[n] - (U[n - 2] / (2.0 * W - 1.0) if n >= 2 else 0.0)
    return M[mid, mid]


@pytest.mark.parametrize("kind", ["T", "U", "U_nW"])
def test_matrix_values_match_dense(kind):
    spec = BandMatrixSpec(W=2, N=12, seed=314)
    m = sample_matrix(spec)
    H = m.to_dense()
    for n in range(0, 7):
        want = _dense_poly_00(H, kind, n, spec.W)
        assert poly_of_H_at_00(m, kind, n) == pytest.approx(want, abs=1e-12)


def test_degree_needs_room():
    m = sample_matrix(BandMatrixSpec(W=3, N=5, seed=0))
    with pytest.raises(ValueError):
        poly_of_H_at_00(m, "T", 2)


def test_row_sampling_is_deterministic():
    spec = BandMatrixSpec(W=2, N=16, seed=8)
    a = sample_value_rows(spec, "U", 8, 16)
    b = sample_value_rows(spec, "U", 8, 16)
    assert np.array_equal(a, b)
    # rows are independent draws, not repeats of one realization
    assert not np.array_equal(a[0], a[1])


def test_low_degree_moments_are_exact():
    # U_1(H)(0,0) = 2 H(0,0) = 0 and U_{2,W}(H)(0,0) = 0 hold per sample,
    # so their standard errors vanish
    spec = BandMatrixSpec(W=2, N=16, seed=5)
    series = estimate_moments(spec, "U_nW", 4, 50)
    assert series.values[0] == 1.0
    assert series.values[1] == 0.0
    assert series.std_errors[1] == 0.0
    assert abs(series.values[2]) < 1e-14
    assert series.std_errors[2] < 1e-14


def test_moment_series_validation():
    with pytest.raises(ValueError):
        MomentSeries("T", 2, 3, np.zeros(3), np.zeros(3), 10)
    with pytest.raises(ValueError):
        MomentSeries("X", 2, 2, np.zeros(3), np.zeros(3), 10)


def test_weighted_sum_matches_manual_combination():
    spec = BandMatrixSpec(W=2, N=20, seed=77)
    coeffs = np.array([1.0, 0.0, -0.5, 0.25, 0.1])
    mean, err = estimate_weighted_sum(spec, coeffs, 40, kind="T")
    rows = sample_value_rows(spec, "T", 4, 40)
    per = rows @ coeffs
    assert mean == pytest.approx(per.mean())
    assert err == pytest.approx(per.std(ddof=1) / math.sqrt(40))


def test_T2_mean_matches_closed_form():
    # (H^2)(0,0) = 2W * scale^2 holds per realization, so T_2(H)(0,0) is
    # the constant -(W-1)/(2W-1) and even a small sample nails it
    for W in (1, 2, 3):
        spec = BandMatrixSpec(W=W, N=4 * W, seed=11)
        series = estimate_moments(spec, "T", 2, 200)
        want = -(W - 1.0) / (2.0 * W - 1.0)
        assert series.values[2] == pytest.approx(want, abs=1e-13)
        assert series.std_errors[2] < 1e-14
