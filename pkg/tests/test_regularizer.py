"""Kernel family: closed forms, the summation identity, divided differences,
the simplex sum, and the generating function's two evaluation routes."""

import cmath
import io
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandkpm.regularizer import (
    DeltaKernel, KernelParams, S_eps, TheoremRegimeWarning,
    delta_kernel_eval, divided_difference, divided_difference_by_sum, F_q,
    phi_hat, phi_q, phi_table, phi_truncated, poisson_rhs,
    simplex_moment_sum, write_profile_csv,
)


def P(q, eps, **kw):
    with pytest.warns(TheoremRegimeWarning):
        return KernelParams(q=q, epsilon=eps, **kw)


def test_normalization_and_symmetry():
    for q in (1, 2, 4):
        p = P(q, 0.1)
        assert phi_q(p, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert phi_q(p, -0.8) == pytest.approx(phi_q(p, 0.8), abs=1e-14)


def test_gaussian_closed_forms():
    p = P(1, 0.05)
    assert p.A_q == pytest.approx(math.sqrt(math.pi / 2.0), abs=1e-12)
    for t in np.linspace(0.0, 4.0, 17):
        assert phi_q(p, t) == pytest.approx(math.exp(-t * t / 2.0), abs=1e-8)
    for xi in np.linspace(0.0, 1.5, 11):
        want = math.sqrt(math.pi) * math.exp(-math.pi ** 2 * xi ** 2)
        assert F_q(p, xi) == pytest.approx(want, abs=1e-8)


def test_F_at_zero_is_gamma():
    for q in (1, 2, 4):
        p = P(q, 0.1)
        assert abs(F_q(p, 0.0) - math.gamma(1.0 / (2 * q)) / q) < 1e-8


def test_phi_hat_inverts_to_phi():
    # phi_hat must be the transform of phi under the e^{-2 pi i t xi}
    # convention; invert it numerically on a wide grid
    p = P(1, 0.05)
    xi = np.linspace(-2.5, 2.5, 4001)
    vals = np.array([complex(phi_hat(p, x)) for x in xi])
    for t in (0.0, 0.4, 1.1):
        back = np.trapezoid(vals * np.exp(2j * math.pi * t * xi), xi)
        assert back.real == pytest.approx(phi_q(p, t), abs=1e-9)
        assert abs(back.imag) < 1e-12


@pytest.mark.parametrize("q,eps", [(1, 0.1), (2, 0.1), (1, 0.02), (2, 0.02)])
def test_poisson_identity(q, eps):
    rng = np.random.default_rng(2026)
    p = P(q, eps)
    for _ in range(5):
        theta0 = rng.uniform(0.2, math.pi - 0.2)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        kernel = DeltaKernel(E0=math.cos(theta0), params=p)
        lhs = delta_kernel_eval(kernel, math.cos(theta))
        rhs = poisson_rhs(kernel, theta)
        assert lhs == pytest.approx(rhs, abs=1e-7)


def test_poisson_image_range_saturates():
    p = P(1, 0.1)
    kernel = DeltaKernel(E0=0.3, params=p)
    a = poisson_rhs(kernel, 1.0)
    b = poisson_rhs(kernel, 1.0, m_range=40)
    assert a == pytest.approx(b, abs=1e-13)


def test_truncated_kernel_cutoff():
    p = P(2, 0.1)
    W = 16
    edge = W ** p.eta
    assert phi_truncated(p, edge - 1e-6, W) == pytest.approx(
        phi_q(p, edge - 1e-6), abs=1e-14
    )
    assert phi_truncated(p, edge + 1e-6, W) == 0.0


def test_phi_table_matches_pointwise():
    p = P(2, 0.1)
    table = phi_table(p)
    assert len(table) > 10
    for n in (1, 2, 7, len(table)):
        assert table[n - 1] == pytest.approx(phi_q(p, n * p.epsilon), abs=1e-13)
    # the table runs just past the cutoff: final entry below, previous above
    assert table[-1] < 1e-24 <= table[-2]


def test_delta_kernel_partial_sum():
    p = P(1, 0.2)
    kernel = DeltaKernel(E0=0.5, params=p, n_max=3)
    E = 0.1
    want = 1.0
    for n in (1, 2, 3):
        want += (2.0 * phi_q(p, n * p.epsilon)
                 * math.cos(n * math.acos(0.5)) * math.cos(n * math.acos(E)))
    assert delta_kernel_eval(kernel, E) == pytest.approx(want, abs=1e-12)


def test_divided_difference_of_cubic():
    zs = [0.3 + 0.1j, -0.5 + 0.0j, 0.9j, 1.2 - 0.4j]
    vals = [(z, z ** 3) for z in zs]
    assert abs(divided_difference(vals) - 1.0) < 1e-12
    assert abs(divided_difference(vals) - divided_difference_by_sum(vals)) < 1e-10


@settings(max_examples=40, deadline=None)
@given(perm=st.permutations([0, 1, 2, 3]))
def test_divided_difference_symmetry(perm):
    zs = [0.7 + 0.2j, -0.3 + 0.5j, 0.1 - 0.9j, 1.1 + 0.0j]
    vals = [(z, cmath.exp(z)) for z in zs]
    shuffled = [vals[i] for i in perm]
    assert abs(divided_difference(vals) - divided_difference(shuffled)) < 1e-10


def test_divided_difference_needs_separation():
    with pytest.raises(ValueError):
        divided_difference([(0.5, 1.0), (0.5 + 1e-12, 2.0)])


def _brute_simplex(z, n):
    total = 0j
    E = len(z)
    for comp in itertools.product(range(1, n + 1), repeat=E):
        if sum(comp) == n:
            term = 1 + 0j
            for ze, ne in zip(z, comp):
                term *= ze ** ne
            total += term
    return total


def test_simplex_sum_matches_brute_force():
    rng = np.random.default_rng(7)
    for E in (1, 2, 3, 4):
        for n in (E, E + 2, 9):
            z = rng.uniform(-0.8, 0.8, E) + 1j * rng.uniform(-0.8, 0.8, E)
            got = simplex_moment_sum(list(z), n)
            assert abs(got - _brute_simplex(list(z), n)) < 1e-10


def test_simplex_sum_needs_enough_degree():
    with pytest.raises(ValueError):
        simplex_moment_sum([0.1, 0.2], 1)


def test_generating_function_is_the_series():
    p = P(1, 0.1)
    table = phi_table(p)
    z = 0.6 * cmath.exp(0.7j)
    series = sum(table[n - 1] * z ** (n - 1) for n in range(1, len(table) + 1))
    assert abs(S_eps(p, z) - series) < 1e-12


@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_generating_function_contour_route(j):
    for q in (1, 2):
        p = P(q, 0.05)
        for z in (cmath.exp(1j * math.pi / 3), 0.8 * cmath.exp(2.2j), -0.9 + 0.1j):
            a = S_eps(p, z, j, method="direct")
            b = S_eps(p, z, j, method="contour")
            assert abs(a - b) <= 1e-7 * max(1.0, abs(a))


def test_generating_function_derivative_consistent():
    p = P(1, 0.05)
    z = 0.5 + 0.4j
    h = 1e-6
    fd = (S_eps(p, z + h) - S_eps(p, z - h)) / (2.0 * h)
    assert abs(S_eps(p, z, 1) - fd) < 1e-5


def test_regime_warning_boundaries():
    with pytest.warns(TheoremRegimeWarning):
        KernelParams(q=1, epsilon=0.05)
    with pytest.warns(TheoremRegimeWarning):
        KernelParams(q=51, epsilon=0.05, eta=0.005)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        KernelParams(q=51, epsilon=0.05, eta=0.5)


def test_profile_csv_shape():
    p = P(1, 0.1)
    buf = io.StringIO()
    write_profile_csv(p, [0.0, 1.0], [0.0, 0.5], buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "quantity,x,value"
    assert len(lines) == 5
    q0, x0, v0 = lines[1].split(",")
    assert (q0, x0) == ("phi", "0.0")
    assert float(v0) == pytest.approx(1.0, abs=1e-12)
