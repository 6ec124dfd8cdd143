"""The super-exponentially decaying kernel family and its Fourier machinery.

The kernel phi_q is the self-convolution of exp(-s^(2q)) normalized to 1 at
the origin.  Everything downstream (the regularized delta kernel, the
generating function S_eps and its divided differences, the truncated kernel)
is built from it.  The Fourier convention throughout is

    g_hat(xi) = integral g(t) exp(-2 pi i t xi) dt,

under which the transform of phi_q is F_q^2 / A_q with F_q the transform of
exp(-x^(2q)) and A_q the normalization integral.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)

# phi values below this are treated as an exact zero tail; chosen so that
# even third-derivative sums of S_eps keep absolute errors near 1e-16.
_PHI_TAIL = 1e-24
_MAX_SERIES_TERMS = 500_000


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


class TheoremRegimeWarning(UserWarning):
    """Kernel parameters are outside the regime of the convergence theorem.

    Identities and numerics remain valid; only the theorem's constants are
    not guaranteed.
    """


def _panel_integrate(f, a: float, b: float, panels: int):
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    x = (mid + half * _GL_NODES[None, :]).ravel()
    vals = np.asarray(f(x)).reshape(mid.shape[0], _GL_NODES.size)
    return np.sum(vals * (half * _GL_WEIGHTS[None, :]))


def _adaptive_integrate(f, a: float, b: float, tol: float, start_panels: int = 8):
    prev = _panel_integrate(f, a, b, start_panels)
    panels = 2 * start_panels
    while panels <= start_panels * 2 ** 14:
        cur = _panel_integrate(f, a, b, panels)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
        panels *= 2
    raise QuadratureError(
        f"integral on [{a}, {b}] did not stabilize to {tol} at {panels // 2} panels"
    )


def _decay_halfwidth(q: int, tol: float) -> float:
    return math.log(1.0 / tol) ** (1.0 / (2 * q))


@dataclass(frozen=True)
class KernelParams:
    """Kernel order q, step epsilon, truncation exponent eta.

    A_q is computed at construction.  A warning flags parameter choices
    outside the regime (2q-1)/(2q) > 0.99 and 2*q*eta > eta + 0.99 required
    by the convergence analysis; desk-scale identity checks do not need it.
    """

    q: int
    epsilon: float
    eta: float = 0.5
    quadrature_tolerance: float = 1e-11
    A_q: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.q, int) or self.q < 1:
            raise ValueError(f"q must be a positive integer, got {self.q!r}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.eta <= 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.quadrature_tolerance <= 0:
            raise ValueError("quadrature_tolerance must be positive")
        if self.A_q == 0.0:
            L = _decay_halfwidth(self.q, self.quadrature_tolerance)
            val = _adaptive_integrate(
                lambda s: np.exp(-2.0 * s ** (2 * self.q)),
                -L,
                L,
                self.quadrature_tolerance,
            )
            object.__setattr__(self, "A_q", float(val.real))
        if self.A_q <= 0:
            raise ValueError("A_q must be positive")
        ok_decay = (2 * self.q - 1) / (2 * self.q) > 0.99
        ok_trunc = 2 * self.q * self.eta > self.eta + 0.99
        if not (ok_decay and ok_trunc):
            warnings.warn(
                f"q={self.q}, eta={self.eta} are outside the theorem regime "
                "(need (2q-1)/2q > 0.99 and 2*q*eta > eta + 0.99); "
                "identities still hold at these parameters",
                TheoremRegimeWarning,
                stacklevel=2,
            )


def phi_q(params: KernelParams, t: float) -> float:
    """Normalized self-convolution kernel; even, 1 at the origin."""
    t = abs(float(t))
    q = params.q
    tol = params.quadrature_tolerance
    L = _decay_halfwidth(q, tol) + t
    val = _adaptive_integrate(
        lambda s: np.exp(-(s ** (2 * q)) - (t - s) ** (2 * q)), -L, L, tol
    )
    return float(val.real) / params.A_q


def F_q(params: KernelParams, xi: complex) -> complex:
    """Entire Fourier transform of exp(-x^(2q)) at xi (complex allowed)."""
    q = params.q
    tol = params.quadrature_tolerance
    xi = complex(xi)
    im = abs(xi.imag)
    L = _decay_halfwidth(q, tol)
    if im > 0:
        # enlarge until exp(-L^2q + 2 pi |Im xi| L) < tol
        target = math.log(1.0 / tol)
        for _ in range(200):
            new = (target + 2.0 * math.pi * im * L) ** (1.0 / (2 * q))
            if abs(new - L) < 1e-12:
                L = new
                break
            L = new
    coeff = -2.0j * math.pi * xi

    def f(x):
        return np.exp(coeff * x - x ** (2 * q))

    val = _adaptive_integrate(f, -L, L, tol)
    return complex(val)


_F_CACHE: dict = {}


def _F_q_cached(params: KernelParams, xi: complex) -> complex:
    key = (params.q, params.quadrature_tolerance, complex(xi))
    hit = _F_CACHE.get(key)
    if hit is None:
        hit = F_q(params, xi)
        _F_CACHE[key] = hit
    return hit


def phi_hat(params: KernelParams, xi: complex) -> complex:
    """Fourier transform of phi_q under the e^(-2 pi i t xi) convention."""
    v = _F_q_cached(params, xi)
    return v * v / params.A_q


def phi_truncated(params: KernelParams, t: float, W: int) -> float:
    """phi_q cut off sharply at |t| <= W**eta."""
    if W < 1:
        raise ValueError(f"W must be >= 1, got {W}")
    if abs(t) > W ** params.eta:
        return 0.0
    return phi_q(params, t)


_PHI_TABLE_CACHE: dict = {}


def phi_table(params: KernelParams) -> np.ndarray:
    """phi_q(n * epsilon) for n = 1, 2, ... down to a negligible tail.

    Cached per (q, epsilon, tolerance); the table length sets the summation
    range of every series built on the kernel.
    """
    key = (params.q, params.epsilon, params.quadrature_tolerance)
    hit = _PHI_TABLE_CACHE.get(key)
    if hit is None:
        vals = []
        n = 1
        while True:
            v = phi_q(params, n * params.epsilon)
            vals.append(v)
            if v < _PHI_TAIL:
                break
            n += 1
            if n > _MAX_SERIES_TERMS:
                raise QuadratureError(
                    f"kernel tail still {v} after {n} terms at epsilon={params.epsilon}"
                )
        hit = np.array(vals)
        _PHI_TABLE_CACHE[key] = hit
    return hit


@dataclass(frozen=True)
class DeltaKernel:
    """Regularized delta kernel 1 + 2 sum phi_q(n eps) T_n(E0) T_n(E)."""

    E0: float
    params: KernelParams
    n_max: Optional[int] = None

    def __post_init__(self) -> None:
        if not -1.0 < self.E0 < 1.0:
            raise ValueError(f"E0 must lie in (-1, 1), got {self.E0}")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be >= 1 when given")

    def resolved_n_max(self) -> int:
        if self.n_max is not None:
            return self.n_max
        return len(phi_table(self.params))


def _cheb_T_values(x: float, n_max: int) -> np.ndarray:
    out = np.empty(n_max + 1)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = x
    for n in range(2, n_max + 1):
        out[n] = 2.0 * x * out[n - 1] - out[n - 2]
    return out


def delta_kernel_eval(kernel: DeltaKernel, E: float) -> float:
    """Partial sum of the kernel series at E; the tail is below the phi
    table cutoff when n_max is left automatic."""
    n_max = kernel.resolved_n_max()
    phis = phi_table(kernel.params)
    n_use = min(n_max, len(phis))
    t0 = _cheb_T_values(kernel.E0, n_use)
    te = _cheb_T_values(float(E), n_use)
    n = np.arange(1, n_use + 1)
    return float(1.0 + 2.0 * np.sum(phis[: n_use] * t0[n] * te[n]))


def poisson_rhs(kernel: DeltaKernel, theta: float, m_range: Optional[int] = None) -> float:
    """Image-sum side of the kernel identity at angle theta.

    Evaluates (1/2eps) * sum over integers m of
    phi_hat((m - (theta + theta0)/2pi)/eps) + phi_hat((m - (theta - theta0)/2pi)/eps).
    """
    eps = kernel.params.epsilon
    theta0 = math.acos(kernel.E0)
    xs = ((theta + theta0) / (2.0 * math.pi), (theta - theta0) / (2.0 * math.pi))
    if m_range is None:
        # the summand at offset u decays like exp(-c (|u|/eps)^(2q/(2q-1)));
        # two units past the fractional centers is far below any tolerance
        m_range = int(math.ceil(max(abs(x) for x in xs))) + 2
    total = 0.0
    for m in range(-m_range, m_range + 1):
        for x in xs:
            total += phi_hat(kernel.params, (m - x) / eps).real
    return total / (2.0 * eps)


def divided_difference(values: Sequence) -> complex:
    """Newton-form divided difference over (point, value) pairs."""
    pts = [complex(p) for p, _ in values]
    table = [complex(v) for _, v in values]
    _check_separation(pts)
    k = len(pts)
    for level in range(1, k):
        for i in range(k - level):
            table[i] = (table[i + 1] - table[i]) / (pts[i + level] - pts[i])
    return table[0]


def divided_difference_by_sum(values: Sequence) -> complex:
    """Explicit symmetric formula; numerically worse, used as a cross-check."""
    pts = [complex(p) for p, _ in values]
    _check_separation(pts)
    total = 0.0 + 0.0j
    for e, (ze, fe) in enumerate(values):
        denom = 1.0 + 0.0j
        for f, (zf, _) in enumerate(values):
            if f != e:
                denom *= complex(ze) - complex(zf)
        total += complex(fe) / denom
    return total


def _check_separation(pts: Sequence[complex], floor: float = 1e-9) -> None:
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) < floor:
                raise ValueError(
                    f"points {pts[i]} and {pts[j]} closer than {floor}; "
                    "divided differences here require distinct points"
                )


def simplex_moment_sum(z: Sequence[complex], n: int) -> complex:
    """Sum of prod z_e^(n_e) over positive compositions of n into E parts,
    via the divided difference of the (n-1)-th power function."""
    E = len(z)
    if E < 1:
        raise ValueError("need at least one point")
    if n < E:
        raise ValueError(f"n={n} smaller than the number of parts E={E}")
    pts = [complex(v) for v in z]
    if E == 1:
        return pts[0] ** n
    dd = divided_difference([(p, p ** (n - 1)) for p in pts])
    prod = 1.0 + 0.0j
    for p in pts:
        prod *= p
    return dd * prod


def _falling(n: int, j: int) -> float:
    out = 1.0
    for i in range(j):
        out *= n - i
    return out


def S_eps(
    params: KernelParams,
    z: complex,
    derivative_order: int = 0,
    method: str = "direct",
    one_minus_z_floor: float = 1e-8,
) -> complex:
    """j-th derivative of sum_{n>=1} phi_q(n eps) z^(n-1) at z, |z| <= 1.

    Direct summation converges on the whole closed disk thanks to the
    super-exponential kernel decay; the contour route integrates
    F_q^2 along rays at angle pi/(8q) and must agree with it.
    """
    j = derivative_order
    if j < 0:
        raise ValueError("derivative_order must be >= 0")
    z = complex(z)
    if abs(z) > 1.0 + 1e-12:
        raise ValueError(f"|z| must be <= 1, got {abs(z)}")
    if abs(1.0 - z) < one_minus_z_floor:
        raise ValueError(f"z={z} too close to 1 (floor {one_minus_z_floor})")
    if method == "direct":
        phis = phi_table(params)
        total = 0.0 + 0.0j
        for idx in range(len(phis)):
            n = idx + 1
            if n - 1 - j < 0:
                continue
            total += phis[idx] * _falling(n - 1, j) * z ** (n - 1 - j)
        return total
    if method == "contour":
        return _s_eps_contour(params, z, j)
    raise ValueError(f"method must be 'direct' or 'contour', got {method!r}")


def _s_eps_contour(params: KernelParams, z: complex, j: int) -> complex:
    q = params.q
    eps = params.epsilon
    tol = params.quadrature_tolerance
    ang = math.pi / (8 * q)
    e_up = cmath.exp(1j * ang)
    e_dn = cmath.exp(1j * (math.pi - ang))

    # truncation radius: walk outward until both ray integrands are dead
    R = 1.0
    while R < 1e4:
        dead = True
        for d in (e_up, e_dn):
            xi = R * d
            f = _F_q_cached(params, xi)
            mag = abs(f) ** 2 * math.exp(-2.0 * math.pi * eps * (xi.imag))
            if mag > tol * 1e-3:
                dead = False
        if dead:
            break
        R *= 1.5
    else:
        raise QuadratureError("contour integrand failed to decay")

    def integrand(rhos: np.ndarray) -> np.ndarray:
        out = np.empty(len(rhos), dtype=complex)
        for i, rho in enumerate(rhos):
            acc = 0.0 + 0.0j
            for d in (e_up, e_dn):
                xi = rho * d
                f = _F_q_cached(params, xi)
                w = cmath.exp(2j * math.pi * eps * xi)
                term = f * f * w ** (j + 1) / (1.0 - z * w) ** (j + 1) * d
                acc += term if d is e_up else -term
            out[i] = acc
        return out

    val = _adaptive_integrate(integrand, 0.0, R, tol)
    return complex(val) * math.factorial(j) / params.A_q


def write_profile_csv(params: KernelParams, t_values, xi_values, fileobj) -> None:
    """Dump (t, phi_q(t)) and (xi, |F_q(xi)|) rows for plotting."""
    import csv

    writer = csv.writer(fileobj)
    writer.writerow(["quantity", "x", "value"])
    for t in t_values:
        writer.writerow(["phi", repr(float(t)), repr(phi_q(params, t))])
    for xi in xi_values:
        writer.writerow(["F_abs", repr(float(xi)), repr(abs(F_q(params, xi)))])
