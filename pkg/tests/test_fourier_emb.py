"""Band symbol, Kirchhoff bases, and the embedding integrals."""

import cmath
import io
import math

import numpy as np
import pytest

from bandkpm.diagrams import Diagram
from bandkpm.fourier_emb import (
    EmbQuery, cycle_basis, chebyshev_transfer_prob, emb_bound_check,
    emb_loop_oracle, emb_sharp, emb_theta_oracle, kirchhoff_basis,
    nonbacktracking_walk_counts, transition_power_table, w_bound_constant,
    w_eval, w_eval_sum, write_ladder_csv,
)
from bandkpm.regularizer import KernelParams, TheoremRegimeWarning


def P(q, eps):
    with pytest.warns(TheoremRegimeWarning):
        return KernelParams(q=q, epsilon=eps)


LOOP = Diagram((0,), ((0, 0),), (0, 0))
THETA = Diagram((0, 1), ((0, 1), (0, 1), (0, 1)), (0, 1, 2, 0, 1, 2))
FIGURE8 = Diagram((0,), ((0, 0), (0, 0)), (0, 0, 1, 1))


def test_symbol_forms_agree():
    xi = np.linspace(1e-4, 1.0 - 1e-4, 257)
    for W in (1, 2, 7, 32):
        assert np.max(np.abs(w_eval(W, xi) - w_eval_sum(W, xi))) < 1e-12


def test_symbol_near_singular_arguments():
    # the closed form divides by sin(pi xi); integers fall back to the sum
    for W in (3, 8):
        for xi in (0.0, 1.0, 2.0, 1e-10):
            want = w_eval_sum(W, xi)
            assert w_eval(W, xi) == pytest.approx(want, abs=1e-12)
    assert w_eval(5, 0.0) == pytest.approx(1.0, abs=1e-14)


def test_symbol_symmetries():
    xi = np.linspace(0.01, 0.49, 25)
    for W in (2, 9):
        assert np.allclose(w_eval(W, xi), w_eval(W, -xi), atol=1e-14)
        assert np.allclose(w_eval(W, xi), w_eval(W, 1.0 + xi), atol=1e-12)


def test_symbol_bound_constant_positive():
    # W = 1 is excluded: |w(1/2)| = |cos(pi)| = 1 there, which no positive
    # c can dominate
    c = w_bound_constant([2, 4, 8, 16], grid_points=20_000)
    assert c > 0.0
    # deterministic: same call, same value
    assert c == w_bound_constant([2, 4, 8, 16], grid_points=20_000)


def test_symbol_bound_constant_superset_monotone():
    small = w_bound_constant([2, 4, 8], grid_points=5_000)
    large = w_bound_constant([2, 4, 8, 64, 256], grid_points=5_000)
    assert small >= large > 0.0


def test_cycle_basis_shapes():
    theta = cycle_basis(2, ((0, 1), (0, 1), (0, 1)))
    assert theta.dimension == 2
    loops = cycle_basis(1, ((0, 0), (0, 0)))
    assert loops.dimension == 2
    assert loops.basis == ((1, 0), (0, 1))
    with pytest.raises(ValueError):
        cycle_basis(3, ((0, 1),))  # vertex 2 unreachable


def test_cycle_basis_rows_are_circulations():
    # net signed flow vanishes at every vertex for each basis row
    edges = ((0, 1), (1, 2), (0, 2), (0, 1), (2, 2))
    sub = cycle_basis(3, edges)
    assert sub.dimension == 3
    for row in sub.basis:
        flow = [0, 0, 0]
        for coeff, (u, v) in zip(row, edges):
            if u != v:
                flow[u] -= coeff
                flow[v] += coeff
        assert not any(flow)


def test_kirchhoff_basis_dimension_is_genus():
    for graph in (LOOP, THETA, FIGURE8):
        assert kirchhoff_basis(graph).dimension == graph.genus


def test_query_validation():
    p = P(1, 0.1)
    with pytest.raises(ValueError):
        EmbQuery(graph=LOOP, g=1.0, params=p, W=4)
    with pytest.raises(ValueError):
        EmbQuery(graph=LOOP, g=2.0j, params=p, W=4)
    with pytest.raises(ValueError):
        EmbQuery(graph=LOOP, g=cmath.exp(1j), params=p, W=0)


def test_loop_embedding_matches_lattice_sum():
    p = P(1, 0.05)
    g = cmath.exp(1j * math.pi / 3)
    got = emb_sharp(EmbQuery(graph=LOOP, g=g, params=p, W=4, tolerance=1e-9))
    want = emb_loop_oracle(g, p, 4)
    assert abs(got - want) < 1e-7


def test_theta_embedding_matches_lattice_sum():
    p = P(2, 0.1)
    g = cmath.exp(1j * math.pi / 3)
    got = emb_sharp(EmbQuery(graph=THETA, g=g, params=p, W=3, tolerance=1e-10))
    want = emb_theta_oracle(g, p, 3)
    assert abs(got - want) < 1e-8


def test_embedding_ignores_traversal():
    p = P(1, 0.1)
    g = cmath.exp(2.0j)
    theta_b = Diagram((0, 1), ((0, 1), (0, 1), (0, 1)), (0, 2, 1, 0, 2, 1))
    a = emb_sharp(EmbQuery(graph=THETA, g=g, params=p, W=3))
    b = emb_sharp(EmbQuery(graph=theta_b, g=g, params=p, W=3))
    assert abs(a - b) < 1e-12


def test_embedding_various_phases():
    # exercise the jitter retry: right angles put symbol values on top of
    # each other for symmetric grids
    p = P(1, 0.1)
    for angle in (math.pi / 2, math.pi, 2.0 * math.pi / 3):
        val = emb_sharp(EmbQuery(graph=LOOP, g=cmath.exp(1j * angle), params=p, W=2))
        assert np.isfinite(val.real) and np.isfinite(val.imag)


def test_genus_three_unsupported():
    p = P(1, 0.1)
    triple_loop = Diagram((0,), ((0, 0), (0, 0), (0, 0)), (0, 0, 1, 1, 2, 2))
    with pytest.raises(ValueError):
        emb_sharp(EmbQuery(graph=triple_loop, g=cmath.exp(1j), params=p, W=2))


def test_bound_check_returns_positive_pair():
    p = P(1, 0.05)
    lhs, rhs = emb_bound_check(
        EmbQuery(graph=LOOP, g=cmath.exp(1j * math.pi / 3), params=p, W=8)
    )
    assert lhs > 0.0 and rhs > 0.0
    # E = V = 1 for the loop: shape factor is (1/|1-g|)^2 * (log W / W)
    assert rhs == pytest.approx(math.log(8.0) / 8.0, abs=1e-12)


def test_loop_embedding_decays_with_band_width():
    p = P(1, 0.05)
    g = cmath.exp(1j * math.pi / 3)
    vals = [abs(emb_loop_oracle(g, p, W)) for W in (8, 16, 32)]
    assert vals[0] > 1.8 * vals[1] > 3.2 * vals[2]


def test_loop_ratio_stays_bounded():
    # shape factor for the loop: (1/|1-g|)^2 * log(W)/W; the measured ratio
    # must not grow along the ladder
    p = P(1, 0.05)
    g = cmath.exp(1j * math.pi / 3)
    ratios = []
    for W in (8, 16, 32):
        lhs, rhs = emb_bound_check(EmbQuery(graph=LOOP, g=g, params=p, W=W))
        ratios.append(lhs / rhs)
    assert all(0.0 < r < 1.0 for r in ratios)
    assert ratios[2] <= ratios[0]


def test_closer_phases_grow_no_faster_than_shape():
    # lhs * |1-g|^2 stays bounded as g approaches 1 along exp(i delta)
    p = P(1, 0.1)
    scaled = []
    for delta in (0.3, 0.1, 0.03):
        g = cmath.exp(1j * delta)
        lhs = abs(emb_sharp(EmbQuery(graph=LOOP, g=g, params=p, W=4)))
        scaled.append(lhs * abs(1.0 - g) ** 2)
    assert all(0.0 < s < 1.0 for s in scaled)


def test_walk_counts_narrow_band():
    # at W = 1 a non-backtracking walk can never turn around
    for n in (1, 2, 3, 5):
        counts = nonbacktracking_walk_counts(1, n)
        assert counts[2 * n] == 1 and counts[0] == 1
        assert sum(counts) == 2


def test_walk_counts_match_transfer_values():
    for W in (1, 2, 3):
        for n in (2, 3, 4):
            counts = nonbacktracking_walk_counts(W, n)
            half = n * W
            for r in range(0, min(4, n * W) + 1):
                want = int(counts[half + r]) / float((2 * W - 1) ** n)
                got = chebyshev_transfer_prob(W, n, r, size=n * W + 2)
                assert got == pytest.approx(want, abs=1e-10)


def test_transition_powers_are_stochastic():
    T = transition_power_table(3, 5)
    for n in range(T.shape[0]):
        assert T[n].sum() == pytest.approx(1.0, abs=1e-12)


def test_ladder_csv_shape():
    buf = io.StringIO()
    write_ladder_csv(
        [{
            "graph_id": "loop", "W": 4, "g_real": 0.5, "g_imag": 0.25,
            "epsilon": 0.05, "q": 1, "emb_abs": 0.1, "shape_factor": 0.2,
            "ratio": 0.5,
        }],
        buf,
    )
    lines = buf.getvalue().strip().splitlines()
    assert lines[0].startswith("graph_id,W,")
    assert lines[1].startswith("loop,4,0.5,")
