"""Exact enumeration of closed non-backtracking paths on the banded lattice.

The graph is the integers with u ~ v whenever 0 < |u - v| <= W.  All counts
here are for paths that traverse every edge an even number of times, which is
the class whose cardinality equals the ensemble-averaged matrix elements of
the non-backtracking Chebyshev combinations.  Two flavours are counted:

* plain:         u_j != u_{j+2} for j = 0 .. n-2
* strengthened:  plain plus the cyclic wraparound u_{n-1} != u_1

Counts are exact Python integers.  A handful of formal boundary values are
built in so that the difference identity

    plain_n - (2W-1) * plain_{n-2} == strengthened_n - strengthened_{n-2}

holds for every n >= 1: negative lengths count 0, and the strengthened count
at n = 0 is defined to be 2W - 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

KINDS = ("plain", "strengthened")

# Exhaustive enumeration blows up combinatorially; anything beyond these
# caps must be requested explicitly.
DEFAULT_MAX_LENGTH = 10
DEFAULT_MAX_WIDTH = 3


class EnumerationCapError(ValueError):
    """Requested (n, W) exceeds the configured exhaustive-enumeration cap."""


@dataclass(frozen=True)
class LatticeGraphSpec:
    """The graph on the integers with u ~ v iff 0 < |u - v| <= W."""

    W: int

    def __post_init__(self) -> None:
        if not isinstance(self.W, int) or self.W < 1:
            raise ValueError(f"W must be a positive integer, got {self.W!r}")

    def adjacent(self, u: int, v: int) -> bool:
        return 0 < abs(u - v) <= self.W


@dataclass(frozen=True)
class LatticePath:
    """A vertex sequence u_0 .. u_n with consecutive vertices adjacent."""

    W: int
    vertices: tuple

    def __post_init__(self) -> None:
        spec = LatticeGraphSpec(self.W)
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) == 0:
            raise ValueError("a path needs at least one vertex")
        for a, b in zip(verts, verts[1:]):
            if not spec.adjacent(a, b):
                raise ValueError(f"vertices {a} and {b} are not adjacent at W={self.W}")

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def steps(self) -> tuple:
        """Ordered steps (u_j, u_{j+1})."""
        return tuple(zip(self.vertices, self.vertices[1:]))

    def edge_multiplicities(self) -> dict:
        """Multiplicity of each unordered edge along the path."""
        mult: dict = {}
        for a, b in self.steps():
            key = (a, b) if a < b else (b, a)
            mult[key] = mult.get(key, 0) + 1
        return mult

    def has_even_multiplicities(self) -> bool:
        return all(m % 2 == 0 for m in self.edge_multiplicities().values())

    def is_non_backtracking(self, kind: str = "plain") -> bool:
        _check_kind(kind)
        v = self.vertices
        n = self.length
        for j in range(n - 1):
            if v[j] == v[j + 2]:
                return False
        if kind == "strengthened":
            if n < 2:
                return True
            if v[n - 1] == v[1]:
                return False
        return True


def _check_kind(kind: str) -> None:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def _check_caps(W: int, n: int, max_length: int, max_width: int) -> None:
    if n > max_length or W > max_width:
        raise EnumerationCapError(
            f"enumeration at n={n}, W={W} exceeds the cap "
            f"(max_length={max_length}, max_width={max_width}); "
            "raise the cap explicitly if you really want this"
        )


def iter_paths(
    W: int,
    n: int,
    u0: int = 0,
    un: int = 0,
    kind: str = "plain",
    max_length: int = DEFAULT_MAX_LENGTH,
    max_width: int = DEFAULT_MAX_WIDTH,
) -> Iterator[tuple]:
    """Yield every even-multiplicity non-backtracking path as a vertex tuple.

    Only genuine paths are yielded; the formal boundary values returned by
    count_paths for n <= 0 have no path set behind them (except the single
    zero-length path when u0 == un).
    """
    LatticeGraphSpec(W)
    _check_kind(kind)
    if n < 0:
        return
    _check_caps(W, n, max_length, max_width)
    if n == 0:
        if u0 == un and kind == "plain":
            yield (u0,)
        return
    if n % 2 == 1 or abs(u0 - un) > n * W:
        # Even multiplicities force an even total step count, and each step
        # moves at most W.
        return
    if kind == "strengthened" and n == 2:
        return

    path = [u0]
    mult: dict = {}

    def dfs(odd_edges: int) -> Iterator[tuple]:
        pos = len(path) - 1
        if pos == n:
            if path[-1] == un and odd_edges == 0:
                yield tuple(path)
            return
        remaining = n - pos
        cur = path[-1]
        prev2 = path[-2] if pos >= 1 else None
        for step in range(-W, W + 1):
            if step == 0:
                continue
            nxt = cur + step
            if nxt == prev2:
                continue
            if kind == "strengthened" and pos + 1 == n - 1 and nxt == path[1]:
                continue
            if abs(nxt - un) > (remaining - 1) * W:
                continue
            key = (cur, nxt) if cur < nxt else (nxt, cur)
            old = mult.get(key, 0)
            new_odd = odd_edges + (1 if old % 2 == 0 else -1)
            # Every odd-multiplicity edge still needs at least one more
            # traversal, and fixing all parities takes remaining-1 more
            # steps of matching parity.
            left = remaining - 1
            if new_odd > left or (left - new_odd) % 2 != 0:
                continue
            mult[key] = old + 1
            path.append(nxt)
            yield from dfs(new_odd)
            path.pop()
            if old == 0:
                del mult[key]
            else:
                mult[key] = old

    yield from dfs(0)


def count_paths(
    W: int,
    n: int,
    u0: int = 0,
    un: int = 0,
    kind: str = "plain",
    max_length: int = DEFAULT_MAX_LENGTH,
    max_width: int = DEFAULT_MAX_WIDTH,
) -> int:
    """Exact count of even-multiplicity non-backtracking paths u0 -> un.

    Formal conventions: any negative n counts 0; n = 0 counts 1 for u0 == un
    in the plain flavour and 2W - 1 in the strengthened flavour (the value
    that makes the plain/strengthened difference identity hold at n = 2).
    """
    LatticeGraphSpec(W)
    _check_kind(kind)
    if n < 0:
        return 0
    if n == 0:
        if u0 != un:
            return 0
        return 1 if kind == "plain" else 2 * W - 1
    return sum(1 for _ in iter_paths(W, n, u0, un, kind, max_length, max_width))


@dataclass(frozen=True)
class PathCountTable:
    """Exact plain/strengthened closed-path counts for 0 <= n <= max_length.

    paths[n] is the plain count for closed paths at the origin; paths0 is
    offset by one so that paths0[0] holds the formal n = -1 value 0 and
    paths0[n + 1] holds the strengthened count for length n.
    """

    W: int
    max_length: int
    paths: tuple
    paths0: tuple

    def __post_init__(self) -> None:
        if len(self.paths) != self.max_length + 1:
            raise ValueError("paths must have one entry per n in 0..max_length")
        if len(self.paths0) != self.max_length + 2:
            raise ValueError("paths0 must additionally carry the n = -1 entry")

    def paths_at(self, n: int) -> int:
        if n < 0:
            return 0
        if n > self.max_length:
            raise IndexError(f"n={n} beyond table max_length={self.max_length}")
        return self.paths[n]

    def paths0_at(self, n: int) -> int:
        if n < -1:
            return 0
        if n > self.max_length:
            raise IndexError(f"n={n} beyond table max_length={self.max_length}")
        return self.paths0[n + 1]

    def rows(self) -> list:
        """Rows (W, n, paths, paths0) for n = 0 .. max_length."""
        return [
            (self.W, n, self.paths_at(n), self.paths0_at(n))
            for n in range(self.max_length + 1)
        ]


def build_table(
    W: int,
    max_length: int,
    max_length_cap: int = DEFAULT_MAX_LENGTH,
    max_width_cap: int = DEFAULT_MAX_WIDTH,
) -> PathCountTable:
    """Enumerate both flavours up to max_length and verify the identity."""
    if max_length < 0 or max_length % 2 != 0:
        raise ValueError(f"max_length must be even and nonnegative, got {max_length}")
    _check_caps(W, max_length, max_length_cap, max_width_cap)
    counts = [
        count_paths(W, n, 0, 0, "plain", max_length_cap, max_width_cap)
        for n in range(max_length + 1)
    ]
    counts0 = [0] + [
        count_paths(W, n, 0, 0, "strengthened", max_length_cap, max_width_cap)
        for n in range(max_length + 1)
    ]
    table = PathCountTable(W, max_length, tuple(counts), tuple(counts0))
    b = 2 * W - 1
    for n in range(1, max_length + 1):
        lhs = table.paths_at(n) - b * table.paths_at(n - 2)
        rhs = table.paths0_at(n) - table.paths0_at(n - 2)
        if lhs != rhs:
            raise AssertionError(
                f"path-count identity failed at W={W}, n={n}: {lhs} != {rhs}"
            )
    return table


def exact_T_moment(table: PathCountTable, n: int, via: str = "plain") -> Fraction:
    """Exact ensemble average of the degree-n first-kind polynomial at (0,0).

    Both routes evaluate the same rational number; "plain" sums the telescoped
    differences of plain counts, "strengthened" uses the closed form in the
    strengthened count alone, so agreement between them is a genuine
    cross-check of the enumerations.
    """
    if via not in ("plain", "strengthened"):
        raise ValueError(f"via must be 'plain' or 'strengthened', got {via!r}")
    if n < 0 or n > table.max_length:
        raise ValueError(f"n={n} out of range 0..{table.max_length}")
    if n == 0:
        return Fraction(1)
    if n % 2 == 1:
        return Fraction(0)
    W = table.W
    b = 2 * W - 1
    denom = 2 * b ** (n // 2)
    if via == "plain":
        num = sum(
            table.paths_at(n - 2 * m) - b * table.paths_at(n - 2 * m - 2)
            for m in range(n // 2 + 1)
        )
    else:
        num = table.paths0_at(n) - 2 * W + 2
    return Fraction(num, denom)


def write_csv(table: PathCountTable, fileobj) -> None:
    """Write the table as CSV with columns (W, n, paths, paths0)."""
    writer = csv.writer(fileobj)
    writer.writerow(["W", "n", "paths", "paths0"])
    for row in table.rows():
        writer.writerow(row)
