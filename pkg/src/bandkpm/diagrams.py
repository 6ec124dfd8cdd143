"""Pairings of closed paths and their contraction to marked multigraphs.

A closed even-multiplicity path on the banded lattice, together with a
pairing of its steps (two steps per unordered lattice edge occurrence), is
contracted to a multigraph with a marked base vertex and a traversal that
passes every surviving edge exactly twice.  The genus E - V + 1 of the
result is what controls the size of the corresponding embedding integrals.

Contraction repeatedly unites two consecutive traversal steps whose partner
steps are also consecutive.  A unite is performed only when the vertex
between the two steps is the same as the vertex between the two partner
steps and when that vertex has no other live incidences, so every unite
removes exactly one edge and one vertex and the genus never changes.  The
traversal is treated as a walk with a fixed base point, not cyclically, so
the marked vertex always survives.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .path_oracle import LatticePath, iter_paths


@dataclass(frozen=True)
class Pairing:
    """Fixed-point-free involution on step indices 0 .. n-1."""

    partner: tuple

    def __post_init__(self) -> None:
        p = tuple(int(x) for x in self.partner)
        object.__setattr__(self, "partner", p)
        n = len(p)
        for j, k in enumerate(p):
            if not 0 <= k < n or k == j or p[k] != j:
                raise ValueError("partner must be a fixed-point-free involution")

    def __getitem__(self, j: int) -> int:
        return self.partner[j]

    def pairs(self) -> list:
        return [(j, k) for j, k in enumerate(self.partner) if j < k]

    def validate_for(self, path: LatticePath) -> None:
        """Paired steps must traverse the same unordered lattice edge."""
        steps = path.steps()
        if len(steps) != len(self.partner):
            raise ValueError("pairing size does not match path length")
        for j, k in self.pairs():
            if frozenset(steps[j]) != frozenset(steps[k]):
                raise ValueError(f"steps {j} and {k} traverse different edges")


def _matchings(items: Sequence[int]) -> Iterator[list]:
    """All perfect matchings of an even-sized index list."""
    if not items:
        yield []
        return
    first, rest = items[0], list(items[1:])
    for i, other in enumerate(rest):
        for tail in _matchings(rest[:i] + rest[i + 1 :]):
            yield [(first, other)] + tail


def enumerate_pairings(path: LatticePath) -> list:
    """Every pairing of the path; errors if some edge has odd multiplicity."""
    if not path.is_closed:
        raise ValueError("pairings are defined for closed paths")
    groups: dict = {}
    for j, (a, b) in enumerate(path.steps()):
        groups.setdefault((a, b) if a < b else (b, a), []).append(j)
    for edge, members in groups.items():
        if len(members) % 2 != 0:
            raise ValueError(f"edge {edge} has odd multiplicity {len(members)}")
    out = []
    per_edge = [list(_matchings(members)) for members in groups.values()]
    for combo in itertools.product(*per_edge):
        partner = [0] * path.length
        for matching in combo:
            for j, k in matching:
                partner[j] = k
                partner[k] = j
        out.append(Pairing(tuple(partner)))
    return out


@dataclass(frozen=True)
class Diagram:
    """Marked multigraph plus a traversal passing every edge exactly twice.

    Vertices are 0 .. V-1 with the marked vertex always 0.  edges[i] is an
    ordered pair (a, b) with a <= b; loops have a == b.  The traversal lists
    edge indices in walk order, starting and ending at the marked vertex.
    The order records the heaviest lattice-edge multiplicity of the source
    path, in units of pairs.
    """

    vertices: tuple
    edges: tuple
    traversal: tuple
    order: int = 1
    marked: int = 0

    def __post_init__(self) -> None:
        verts = tuple(range(len(self.vertices)))
        if tuple(self.vertices) != verts:
            raise ValueError("vertices must be 0..V-1")
        if self.marked != 0:
            raise ValueError("the marked vertex is labeled 0")
        if self.order < 1:
            raise ValueError("order must be >= 1")
        for a, b in self.edges:
            if not (0 <= a <= b < len(verts)):
                raise ValueError(f"edge ({a}, {b}) out of range or unsorted")
        counts = [0] * len(self.edges)
        for e in self.traversal:
            counts[e] += 1
        if any(c != 2 for c in counts):
            raise ValueError("traversal must pass every edge exactly twice")
        self._walk_vertices()  # raises if the edge sequence is not a walk
        if self.genus < 1:
            raise ValueError(f"genus {self.genus} < 1; not a valid diagram")

    def _walk_vertices(self) -> tuple:
        """Vertex sequence of the traversal, marked to marked."""
        cur = self.marked
        seq = [cur]
        for e in self.traversal:
            a, b = self.edges[e]
            if cur == a:
                cur = b
            elif cur == b:
                cur = a
            else:
                raise ValueError(f"traversal leaves vertex {cur} via edge ({a}, {b})")
            seq.append(cur)
        if cur != self.marked:
            raise ValueError("traversal does not return to the marked vertex")
        return tuple(seq)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def genus(self) -> int:
        return len(self.edges) - len(self.vertices) + 1

    def degree(self, v: int) -> int:
        d = 0
        for a, b in self.edges:
            d += (a == v) + (b == v)
        return d

    def canonical_key(self) -> tuple:
        """Isomorphism key with the marked vertex pinned at 0.

        The traversal is intentionally not part of the key; classes are
        counted by marked multigraph shape.
        """
        others = range(1, self.vertex_count)
        best = None
        for perm in itertools.permutations(others):
            relabel = {0: 0}
            relabel.update({old: new for new, old in enumerate(perm, start=1)})
            edges = sorted(
                tuple(sorted((relabel[a], relabel[b]))) for a, b in self.edges
            )
            key = tuple(edges)
            if best is None or key < best:
                best = key
        return (self.vertex_count, self.edge_count, best)


def genus(d: Diagram) -> int:
    return d.genus


def is_simple(d: Diagram) -> bool:
    """Marked degree exactly 2 and every other degree exactly 3."""
    if d.order != 1:
        raise ValueError("simplicity is defined for order-1 diagrams")
    if d.degree(d.marked) != 2:
        return False
    return all(d.degree(v) == 3 for v in range(1, d.vertex_count))


class _UnionFind:
    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _contract_core(
    m: int,
    partner: Sequence[int],
    visit_class: Sequence,
    order: int,
    scan_reverse: bool = False,
) -> Diagram:
    """Run the unite loop on a based closed walk of m steps.

    visit_class[j] labels the vertex at time j for j = 0..m, with
    visit_class[0] == visit_class[m] the marked vertex.  scan_reverse flips
    the scan direction; the terminal diagram must not depend on it.
    """
    marked_class = visit_class[0]
    if visit_class[m] != marked_class:
        raise ValueError("walk is not closed")

    nxt: dict = {j: j + 1 for j in range(m - 1)}
    prv: dict = {j + 1: j for j in range(m - 1)}
    between: dict = {j: visit_class[j + 1] for j in range(m - 1)}
    part: dict = {j: partner[j] for j in range(m)}

    def absorb(x: int) -> None:
        # remove x by uniting it into its predecessor
        y = prv.pop(x)
        after = nxt.pop(x, None)
        if after is None:
            del between[y]
            nxt.pop(y, None)
        else:
            nxt[y] = after
            prv[after] = y
            between[y] = between.pop(x)
        del part[x]

    changed = True
    while changed:
        changed = False
        for p in sorted(part, reverse=scan_reverse):
            s = nxt.get(p)
            if s is None:
                continue
            q = part[p]
            q2 = part[s]
            if p in (q, q2) or s in (q, q2):
                continue
            if nxt.get(q) == q2:
                mid2 = between[q]
                keep, drop = q, q2
            elif nxt.get(q2) == q:
                mid2 = between[q2]
                keep, drop = q2, q
            else:
                continue
            mid1 = between[p]
            if mid1 != mid2:
                continue
            joints = sum(1 for c in between.values() if c == mid1)
            if mid1 == marked_class:
                joints += 2  # the base point is pinned by the walk ends
            if joints != 2:
                continue
            absorb(s)
            absorb(drop)
            part[p] = keep
            part[keep] = p
            changed = True
            break

    live = []
    j = 0
    while j is not None:
        live.append(j)
        j = nxt.get(j)

    # endpoints of each live step
    ends = {}
    for p in live:
        tail = between[prv[p]] if p in prv else marked_class
        head = between[p] if p in between else marked_class
        ends[p] = (tail, head)

    edge_ids: dict = {}
    traversal = []
    pair_ends = []
    for p in live:
        key = frozenset((p, part[p]))
        if key not in edge_ids:
            edge_ids[key] = len(edge_ids)
            pair_ends.append(frozenset(ends[p]))
        else:
            eid = edge_ids[key]
            if frozenset(ends[p]) != pair_ends[eid]:
                raise AssertionError("paired steps disagree on endpoints")
        traversal.append(edge_ids[key])

    labels = {marked_class: 0}
    for p in live:
        for c in ends[p]:
            if c not in labels:
                labels[c] = len(labels)
    edges = [None] * len(edge_ids)
    for key, eid in edge_ids.items():
        p = min(key)
        a, b = (labels[c] for c in ends[p])
        edges[eid] = (a, b) if a <= b else (b, a)
    return Diagram(
        vertices=tuple(range(len(labels))),
        edges=tuple(edges),
        traversal=tuple(traversal),
        order=order,
    )


def contract(path: LatticePath, pairing: Pairing, scan_reverse: bool = False) -> Diagram:
    """Contract a (closed path, pairing) couple to its diagram."""
    pairing.validate_for(path)
    if not path.is_closed:
        raise ValueError("contraction is defined for closed paths")
    n = path.length
    steps = path.steps()
    uf = _UnionFind(n + 1)
    uf.union(0, n)
    for j, k in pairing.pairs():
        if steps[j] == steps[k]:
            uf.union(j, k)
            uf.union(j + 1, k + 1)
        else:
            uf.union(j, k + 1)
            uf.union(j + 1, k)
    visit_class = [uf.find(j) for j in range(n + 1)]
    order = max(path.edge_multiplicities().values()) // 2
    return _contract_core(n, pairing.partner, visit_class, order, scan_reverse)


def contract_diagram(d: Diagram) -> Diagram:
    """Contract a diagram's own traversal; fully merged inputs come back
    isomorphic, which is the idempotence check."""
    m = len(d.traversal)
    slots: dict = {}
    partner = [0] * m
    for pos, e in enumerate(d.traversal):
        if e in slots:
            partner[pos] = slots[e]
            partner[slots[e]] = pos
        else:
            slots[e] = pos
    return _contract_core(m, partner, d._walk_vertices(), d.order)


def diagrams_of_path(path: LatticePath) -> list:
    return [contract(path, pairing) for pairing in enumerate_pairings(path)]


def iter_corpus(W: int, max_length: int, kind: str = "strengthened") -> Iterator[LatticePath]:
    """All closed even-multiplicity paths from the origin up to max_length."""
    for n in range(2, max_length + 1, 2):
        for verts in iter_paths(W, n, 0, 0, kind, max_length=max_length, max_width=W):
            yield LatticePath(W, verts)


@dataclass(frozen=True)
class CensusRecord:
    vertex_count: int
    edge_count: int
    genus: int
    simple: bool
    order: int
    multiplicity: int


def census(paths: Iterable[LatticePath]) -> list:
    """Group every (path, pairing) diagram by isomorphism class.

    multiplicity counts how many couples landed in each class; the record
    list is sorted by (genus, vertex_count, edge_count, order).
    """
    buckets: dict = {}
    for path in paths:
        for pairing in enumerate_pairings(path):
            d = contract(path, pairing)
            key = (d.order,) + d.canonical_key()
            if key in buckets:
                buckets[key][1] += 1
            else:
                buckets[key] = [d, 1]
    records = [
        CensusRecord(
            vertex_count=d.vertex_count,
            edge_count=d.edge_count,
            genus=d.genus,
            simple=is_simple(d) if d.order == 1 else False,
            order=d.order,
            multiplicity=count,
        )
        for d, count in buckets.values()
    ]
    records.sort(key=lambda r: (r.genus, r.vertex_count, r.edge_count, r.order))
    return records


def export_census_json(records: Sequence[CensusRecord], fileobj) -> None:
    payload = [
        {
            "vertex_count": r.vertex_count,
            "edge_count": r.edge_count,
            "genus": r.genus,
            "simple": r.simple,
            "order": r.order,
            "multiplicity": r.multiplicity,
        }
        for r in records
    ]
    json.dump(payload, fileobj, indent=2, sort_keys=True)
    fileobj.write("\n")
