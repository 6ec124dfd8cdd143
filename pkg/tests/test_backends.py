"""The numba kernels and the numpy fallbacks must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from bandkpm import _kernels_numpy as knp
from bandkpm.backend import active_backend

knb = pytest.importorskip("bandkpm._kernels_numba")

SEEDS = (0, 1, 12345, 2**63, 2**64 - 1)


def test_derive_seed_bit_identical():
    for master in SEEDS:
        for index in (0, 1, 7, 10_000):
            assert knp.derive_seed(master, index) == knb.derive_seed(master, index)


def test_derive_seed_spreads():
    vals = {knp.derive_seed(99, i) for i in range(1000)}
    assert len(vals) == 1000


def test_edge_sign_bit_identical():
    for seed in SEEDS[:3]:
        for u in range(-6, 6):
            for d in range(1, 4):
                assert knp.edge_sign(seed, u, u + d) == knb.edge_sign(seed, u, u + d)


def test_edge_signs_table_bit_identical():
    for seed in SEEDS:
        a = knp.edge_signs(seed, 40, 3)
        b = knb.edge_signs(seed, 40, 3)
        assert a.dtype == b.dtype == np.int8
        assert np.array_equal(a, b)


def test_edge_signs_matches_scalar_hash():
    seed, N, W = 77, 10, 2
    table = knp.edge_signs(seed, N, W)
    for u in range(-N, N + 1):
        for d in range(1, W + 1):
            if u + d > N:
                continue
            assert table[d - 1, u + N] == knp.edge_sign(seed, u, u + d)


def test_matvec_bit_identical():
    rng = np.random.default_rng(5)
    signs = knp.edge_signs(17, 30, 3)
    x = rng.standard_normal(61)
    a = knp.banded_sign_matvec(signs, x, 3, 0.25)
    b = knb.banded_sign_matvec(signs, x, 3, 0.25)
    assert np.array_equal(a, b)


def test_u_series_bit_identical():
    signs = knp.edge_signs(23, 30, 2)
    scale = 1.0 / (2.0 * np.sqrt(3.0))
    a = knp.u_series_00(signs, 30, 2, scale, 12)
    b = knb.u_series_00(signs, 30, 2, scale, 12)
    assert np.array_equal(a, b)


def test_sample_rows_bit_identical():
    a = knp.sample_u_series(31, 8, 20, 2, 8)
    b = knb.sample_u_series(31, 8, 20, 2, 8)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("choice", ["numpy", "numba"])
def test_env_var_selects_backend(choice):
    env = dict(os.environ, BANDKPM_BACKEND=choice)
    out = subprocess.run(
        [sys.executable, "-c",
         "from bandkpm.backend import active_backend; print(active_backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == choice


def test_env_var_rejects_garbage():
    env = dict(os.environ, BANDKPM_BACKEND="fortran")
    out = subprocess.run(
        [sys.executable, "-c", "import bandkpm.backend"],
        env=env, capture_output=True, text=True,
    )
    assert out.returncode != 0
    assert "BANDKPM_BACKEND" in out.stderr


def test_active_backend_reports_known_name():
    assert active_backend() in ("numba", "numpy")
