"""Kernel backend selection.

The hot inner loops (edge-sign generation and the Chebyshev vector
recursion) exist twice: as numba @njit kernels and as pure-numpy
fallbacks.  The environment variable ``BANDKPM_BACKEND`` picks the path:

* unset or ``auto``: numba when importable, else numpy;
* ``numba``: require numba, fail loudly if missing;
* ``numpy``: force the fallback (useful for debugging and benchmarks).

Both paths produce bit-identical results; ``benchmarks/bench_backends.py``
compares their speed.
"""
from __future__ import annotations

import os

_ENV_VAR = "BANDKPM_BACKEND"


def _resolve() -> str:
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower() or "auto"
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be 'numba' or 'numpy' (or unset), got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise
        return "numpy"
    return "numba"


BACKEND = _resolve()

if BACKEND == "numba":
    from . import _kernels_numba as _impl
else:
    from . import _kernels_numpy as _impl

MASK64 = _impl.MASK64
derive_seed = _impl.derive_seed
edge_sign = _impl.edge_sign
edge_signs = _impl.edge_signs
banded_sign_matvec = _impl.banded_sign_matvec
u_series_00 = _impl.u_series_00
sample_u_series = _impl.sample_u_series


def active_backend() -> str:
    """Name of the kernel implementation in use ('numba' or 'numpy')."""
    return BACKEND
