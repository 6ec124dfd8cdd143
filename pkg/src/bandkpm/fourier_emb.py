"""Fourier-side evaluation of kernel-weighted graph embedding sums.

A multigraph with a marked vertex is embedded into the band lattice by
choosing integer positions for its vertices (marked vertex at the origin)
and step counts for its edges; each edge contributes a power of the band
random-walk transition operator, and the whole configuration is weighted by
the super-exponential kernel of the total step count times a unimodular
twist g per step.

Because the walk is translation invariant, the position sums collapse in
Fourier space to an integral over the subtorus cut out by signed Kirchhoff
constraints at each vertex (loops drop out).  That subtorus has dimension
equal to the cycle rank, i.e. the genus of the diagram, and is parametrized
with unit Jacobian by the cotree coordinates of a fundamental cycle basis.
The integrand is the divided difference of the step generating function
S_eps at the per-edge symbol values g*w(xi_e), times the product of those
values.

Direct lattice-sum oracles (transition-operator powers via convolution) are
provided for the single-loop and theta graphs, along with the
non-backtracking walk identity used as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .diagrams import Diagram
from .regularizer import KernelParams, QuadratureError, phi_table

DEFAULT_BOUND_GRID = 100_000
_SIN_FLOOR = 1e-8
_DD_GAP_FLOOR = 1e-11


def w_eval(W: int, xi):
    """Spectral symbol of the band random walk: mean of cos(2 pi j xi).

    Uses the product form sin(pi W xi) cos(pi (W+1) xi) / (W sin(pi xi)),
    falling back to the cosine sum where sin(pi xi) vanishes.
    Accepts scalars or arrays.
    """
    if W < 1:
        raise ValueError(f"W must be >= 1, got {W}")
    x = np.asarray(xi, dtype=float)
    # fold into [0, 1/2] by periodicity and evenness; near-integer arguments
    # would otherwise lose digits to the sin(pi xi) denominator
    x = np.mod(x, 1.0)
    x = np.minimum(x, 1.0 - x)
    s = np.sin(math.pi * x)
    safe = np.abs(s) > _SIN_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        closed = np.sin(math.pi * W * x) * np.cos(math.pi * (W + 1) * x) / (W * s)
    out = np.where(safe, closed, 0.0)
    if not np.all(safe):
        bad = ~safe
        out = np.array(out, dtype=float)
        out[bad] = w_eval_sum(W, x[bad]) if x.ndim else w_eval_sum(W, x)
    if np.isscalar(xi) or np.asarray(xi).ndim == 0:
        return float(out)
    return out


def w_eval_sum(W: int, xi):
    """Direct cosine-sum form of the symbol; the oracle for w_eval."""
    x = np.asarray(xi, dtype=float)
    j = np.arange(1, W + 1, dtype=float)
    vals = np.cos(2.0 * math.pi * np.multiply.outer(x, j)).sum(axis=-1) / W
    if np.isscalar(xi) or np.asarray(xi).ndim == 0:
        return float(vals)
    return vals


def w_bound_constant(W_list: Sequence[int], grid_points: int = DEFAULT_BOUND_GRID) -> float:
    """Largest c with |w(xi)| <= 1/(1 + c W min(xi, 1-xi)) on a uniform grid.

    The returned value is positive but small: near xi = 0 the symbol departs
    from 1 only quadratically while the bound departs linearly, so the grid
    point closest to 0 controls c.
    """
    if not W_list:
        raise ValueError("W_list must be nonempty")
    xi = np.arange(1, grid_points) / grid_points
    m = np.minimum(xi, 1.0 - xi)
    best = math.inf
    for W in W_list:
        absw = np.abs(w_eval(W, xi))
        mask = absw > 1e-14
        c_here = ((1.0 / absw[mask]) - 1.0) / (W * m[mask])
        best = min(best, float(c_here.min()))
    return best


@dataclass(frozen=True)
class KirchhoffSubspace:
    """Integer cycle basis of the signed flow constraints of a multigraph.

    Rows of `basis` are indexed by independent cycles and columns by edges
    (in the order of `edges`); each row is a circulation: at every vertex
    the signed sum over incident non-loop edges vanishes.  The row count
    equals the cycle rank E - V + 1.
    """

    edges: Tuple[Tuple[int, int], ...]
    basis: Tuple[Tuple[int, ...], ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def __post_init__(self) -> None:
        nv = 0
        for u, v in self.edges:
            nv = max(nv, u + 1, v + 1)
        for row in self.basis:
            if len(row) != len(self.edges):
                raise ValueError("basis row length must equal edge count")
            flow = [0] * nv
            for coeff, (u, v) in zip(row, self.edges):
                if u != v:
                    flow[u] -= coeff
                    flow[v] += coeff
            if any(flow):
                raise ValueError(f"basis row {row} is not a circulation")


def cycle_basis(vertex_count: int, edges: Sequence[Tuple[int, int]]) -> KirchhoffSubspace:
    """Fundamental cycle basis from a spanning tree; loops are free rows."""
    edges = tuple((int(u), int(v)) for u, v in edges)
    adj: list = [[] for _ in range(vertex_count)]
    for idx, (u, v) in enumerate(edges):
        if u != v:
            adj[u].append((v, idx))
            adj[v].append((u, idx))
    parent = {0: None}  # vertex -> (parent vertex, edge idx, sign to parent)
    order = [0]
    tree_edges = set()
    for a in order:
        for b, idx in adj[a]:
            if b not in parent and idx not in tree_edges:
                parent[b] = (a, idx)
                tree_edges.add(idx)
                order.append(b)
    if len(parent) != vertex_count:
        raise ValueError("graph is disconnected")

    def path_to_root(v):
        out = []
        while parent[v] is not None:
            p, idx = parent[v]
            out.append((v, p, idx))
            v = p
        return out

    rows = []
    for idx, (u, v) in enumerate(edges):
        if idx in tree_edges:
            continue
        row = [0] * len(edges)
        row[idx] = 1
        if u != v:
            # close the cycle along the tree: walk v -> root and u -> root,
            # cancel the common tail
            pv = path_to_root(v)
            pu = path_to_root(u)
            while pv and pu and pv[-1][2] == pu[-1][2]:
                pv.pop()
                pu.pop()
            for a, b, eidx in pv:
                eu, ev = edges[eidx]
                row[eidx] += 1 if (a, b) == (eu, ev) else -1
            for a, b, eidx in pu:
                eu, ev = edges[eidx]
                row[eidx] -= 1 if (a, b) == (eu, ev) else -1
        rows.append(tuple(row))
    return KirchhoffSubspace(edges=edges, basis=tuple(rows))


def kirchhoff_basis(graph: Diagram) -> KirchhoffSubspace:
    """Cycle basis of a diagram's multigraph; dimension equals its genus."""
    sub = cycle_basis(graph.vertex_count, graph.edges)
    if sub.dimension != graph.genus:
        raise AssertionError(
            f"cycle rank {sub.dimension} != genus {graph.genus}"
        )
    return sub


@dataclass(frozen=True)
class EmbQuery:
    """One embedding-integral evaluation request."""

    graph: Diagram
    g: complex
    params: KernelParams
    W: int
    grid: int = 8
    tolerance: float = 1e-8
    max_refinements: int = 12

    def __post_init__(self) -> None:
        g = complex(self.g)
        if abs(abs(g) - 1.0) > 1e-12:
            raise ValueError(f"|g| must be 1, got {abs(g)}")
        if abs(1.0 - g) < 1e-8:
            raise ValueError("g must be bounded away from 1")
        if self.W < 1:
            raise ValueError(f"W must be >= 1, got {self.W}")
        if self.grid < 2:
            raise ValueError("grid resolution must be >= 2")


class _DegenerateGrid(Exception):
    pass


def _series_eval(phis: np.ndarray, z: np.ndarray) -> np.ndarray:
    # sum_n phi(n eps) z^(n-1), Horner over the cached kernel table
    acc = np.zeros_like(z)
    for c in phis[::-1]:
        acc = acc * z + c
    return acc


def _integrand(phis: np.ndarray, z_cols: list) -> np.ndarray:
    # divided difference of the generating function over the per-edge symbol
    # values, times their product
    table = [_series_eval(phis, z) for z in z_cols]
    k = len(z_cols)
    for level in range(1, k):
        for i in range(k - level):
            denom = z_cols[i + level] - z_cols[i]
            if float(np.min(np.abs(denom))) < _DD_GAP_FLOOR:
                raise _DegenerateGrid
            table[i] = (table[i + 1] - table[i]) / denom
    prod = np.ones_like(z_cols[0])
    for z in z_cols:
        prod = prod * z
    return table[0] * prod


def _grid_mean(query: EmbQuery, basis: np.ndarray, M: int, offsets: np.ndarray) -> complex:
    genus, E = basis.shape
    axes = [(np.arange(M) + offsets[d]) / M for d in range(genus)]
    if genus == 1:
        t = axes[0][None, :]
    else:
        mesh = np.meshgrid(*axes, indexing="ij")
        t = np.stack([m.ravel() for m in mesh], axis=0)
    xi = np.mod(basis.T @ t, 1.0)  # (E, nodes)
    phis = phi_table(query.params)
    g = complex(query.g)
    z_cols = [g * w_eval(query.W, xi[e]).astype(complex) for e in range(E)]
    vals = _integrand(phis, z_cols)
    return complex(vals.mean())


def emb_sharp(query: EmbQuery) -> complex:
    """Embedding integral over the Kirchhoff subtorus, by equal-weight
    quadrature on a jittered uniform grid, refined by doubling.

    Periodicity and analyticity of the integrand (g keeps the symbol values
    away from the singularity at 1) make the uniform grid converge
    spectrally.  Coinciding symbol values on the grid are handled by
    rescaling the jitter.
    """
    sub = kirchhoff_basis(query.graph)
    genus = sub.dimension
    if genus > 2:
        raise ValueError(f"genus {genus} not supported (integration dim > 2)")
    basis = np.array(sub.basis, dtype=float)
    base_offsets = np.array(
        [0.5 + math.sqrt(2) * 1e-4, 0.5 + math.sqrt(3) * 1e-4][:genus]
    )
    scale = 1.0
    for _ in range(6):
        offsets = np.mod(base_offsets * scale, 1.0)
        try:
            M = query.grid
            prev = _grid_mean(query, basis, M, offsets)
            for _ in range(query.max_refinements):
                M *= 2
                cur = _grid_mean(query, basis, M, offsets)
                if abs(cur - prev) < query.tolerance:
                    return cur
                prev = cur
            raise QuadratureError(
                f"embedding integral did not stabilize to {query.tolerance} "
                f"at grid {M}"
            )
        except _DegenerateGrid:
            scale *= 2.9
    raise QuadratureError("could not find a nondegenerate integration grid")


def emb_bound_check(query: EmbQuery) -> Tuple[float, float]:
    """|emb_sharp| together with the shape factor
    (1/|1-g|)^(E+1) * (log W / W)^(E-V+1) it is to be compared against."""
    lhs = abs(emb_sharp(query))
    E = query.graph.edge_count
    V = query.graph.vertex_count
    rhs = (1.0 / abs(1.0 - complex(query.g))) ** (E + 1) * (
        math.log(query.W) / query.W
    ) ** (E - V + 1)
    return lhs, rhs


def _step_kernel(W: int) -> np.ndarray:
    k = np.full(2 * W + 1, 1.0 / (2 * W))
    k[W] = 0.0
    return k


def transition_power_table(W: int, n_max: int) -> np.ndarray:
    """T[n, c + n_max*W] = n-step transition probability from 0 to c."""
    half = n_max * W
    size = 2 * half + 1
    out = np.zeros((n_max + 1, size))
    out[0, half] = 1.0
    cur = np.array([1.0])
    k = _step_kernel(W)
    for n in range(1, n_max + 1):
        cur = np.convolve(cur, k)
        lo = half - n * W
        out[n, lo : lo + len(cur)] = cur
    return out


def emb_loop_oracle(g: complex, params: KernelParams, W: int) -> complex:
    """Direct sum for the single-loop graph: kernel-weighted return
    probabilities of the band walk."""
    phis = phi_table(params)
    g = complex(g)
    total = 0.0 + 0.0j
    cur = np.array([1.0])
    k = _step_kernel(W)
    gn = 1.0 + 0.0j
    for n in range(1, len(phis) + 1):
        cur = np.convolve(cur, k)
        gn *= g
        total += phis[n - 1] * gn * cur[len(cur) // 2]
    return total


def emb_theta_oracle(
    g: complex, params: KernelParams, W: int, n_cap: int = 40
) -> complex:
    """Brute-force lattice sum for the theta graph (two vertices joined by
    three edges): free vertex position summed over the whole truncated
    range, per-edge step counts up to n_cap."""
    table = transition_power_table(W, n_cap)
    M = table[1:]  # rows n = 1..n_cap
    S = np.einsum("ar,br,cr->abc", M, M, M)
    g = complex(g)
    total_n = np.arange(0, 3 * n_cap + 1)
    weight = np.zeros(len(total_n), dtype=complex)
    for t in range(3, 3 * n_cap + 1):
        ph = _phi_at(params, t * params.epsilon)
        if ph == 0.0:
            continue
        weight[t] = ph * g ** t
    idx = (
        np.add.outer(np.add.outer(np.arange(1, n_cap + 1), np.arange(1, n_cap + 1)),
                     np.arange(1, n_cap + 1))
    )
    return complex(np.sum(S * weight[idx]))


def _phi_at(params: KernelParams, t: float) -> float:
    # read phi(n eps) off the cached table; zero beyond its tail
    phis = phi_table(params)
    n = round(t / params.epsilon)
    if abs(n * params.epsilon - t) > 1e-12:
        raise ValueError("t must be a multiple of epsilon")
    if n < 1 or n > len(phis):
        return 0.0
    return float(phis[n - 1])


def nonbacktracking_walk_counts(W: int, n: int) -> np.ndarray:
    """counts[c + n*W] = closed-form-free count of length-n lattice walks
    from 0 to c whose consecutive steps never exactly cancel."""
    if n < 0:
        raise ValueError("n must be >= 0")
    half = max(n, 1) * W
    size = 2 * half + 1
    steps = [s for s in range(-W, W + 1) if s != 0]
    if n == 0:
        out = np.zeros(size, dtype=object)
        out[half] = 1
        return out
    # state: position x last step
    cur = np.zeros((size, len(steps)), dtype=object)
    for si, s in enumerate(steps):
        cur[half + s, si] = 1
    for _ in range(1, n):
        nxt = np.zeros_like(cur)
        for si, s in enumerate(steps):
            for sj, s2 in enumerate(steps):
                if s2 == -s:
                    continue
                col = cur[:, si]
                if s2 >= 0:
                    nxt[s2:, sj] += col[: size - s2]
                else:
                    nxt[:s2, sj] += col[-s2:]
        cur = nxt
    return cur.sum(axis=1)


def chebyshev_transfer_prob(W: int, n: int, r: int, size: int) -> float:
    """Non-backtracking n-step probability 0 -> r via the modified
    second-kind polynomial of the scaled transition operator, evaluated on
    a truncation of half-width `size` (exact when size >= n*W + 1)."""
    if size < n * W + 1:
        raise ValueError("truncation too small for exact agreement")
    dim = 2 * size + 1
    P = np.zeros((dim, dim))
    for i in range(dim):
        for s in range(-W, W + 1):
            if s == 0:
                continue
            j = i + s
            if 0 <= j < dim:
                P[i, j] = 1.0 / (2 * W)
    M = W * P / math.sqrt(2 * W - 1)
    u_prev = np.eye(dim)
    u_cur = 2.0 * M
    if n == 0:
        u_n, u_nm2 = u_prev, None
    elif n == 1:
        u_n, u_nm2 = u_cur, None
    else:
        u_nm2 = None
        for _ in range(2, n + 1):
            u_nm2 = u_prev
            u_prev, u_cur = u_cur, 2.0 * M @ u_cur - u_prev
        u_n = u_cur
    mat = u_n if u_nm2 is None else u_n - u_nm2 / (2 * W - 1)
    c = size
    return float(mat[c, c + r]) / math.sqrt((2 * W - 1) ** n)


def write_ladder_csv(rows: Sequence[dict], fileobj) -> None:
    """Ladder results: one row per (graph, W, g) evaluation."""
    import csv

    names = [
        "graph_id", "W", "g_real", "g_imag", "epsilon", "q",
        "emb_abs", "shape_factor", "ratio",
    ]
    writer = csv.writer(fileobj)
    writer.writerow(names)
    for row in rows:
        writer.writerow([repr(row[k]) if isinstance(row[k], float) else row[k]
                         for k in names])
