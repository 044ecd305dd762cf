"""Planar proximity graphs and related primitives over 2D point sets.

Implements the Gabriel graph, the relative neighbourhood graph, the
Euclidean minimum spanning tree, a rooted (Prim-style) growth sequence,
and straight-line planarity checking.  Everything here is a pure function
of its inputs; point sets are small (tens of cities), so the O(n^3)
definitional algorithms are used directly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass


class DegeneratePointSetError(ValueError):
    """Raised when two distinct ids share the same coordinates."""


@dataclass(frozen=True)
class PointSet:
    """Ordered collection of named 2D points (lattice units)."""

    points: tuple[tuple[str, float, float], ...]

    def __post_init__(self):
        if not self.points:
            raise ValueError("point set must contain at least one point")
        ids = [p[0] for p in self.points]
        if len(set(ids)) != len(ids):
            raise ValueError("point ids must be unique")
        for pid, x, y in self.points:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"non-finite coordinate for point {pid!r}")

    @classmethod
    def from_pairs(cls, pairs) -> "PointSet":
        return cls(tuple((str(i), float(x), float(y)) for i, x, y in pairs))

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p[0] for p in self.points)

    def coords(self, pid: str) -> tuple[float, float]:
        for i, x, y in self.points:
            if i == pid:
                return (x, y)
        raise KeyError(pid)

    def as_dict(self) -> dict[str, tuple[float, float]]:
        return {i: (x, y) for i, x, y in self.points}

    def __len__(self) -> int:
        return len(self.points)


def _edge(a: str, b: str) -> tuple[str, str]:
    """Canonical unordered pair."""
    return (a, b) if a <= b else (b, a)


@dataclass(frozen=True)
class SimpleCityGraph:
    """Unweighted graph over city ids; edges are canonical unordered pairs."""

    nodes: frozenset[str]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self):
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge ({a!r}, {b!r}) references unknown node")
            if a > b:
                raise ValueError(f"edge ({a!r}, {b!r}) is not in canonical order")

    @classmethod
    def build(cls, nodes, edges) -> "SimpleCityGraph":
        return cls(frozenset(nodes), frozenset(_edge(a, b) for a, b in edges))

    def has_edge(self, a: str, b: str) -> bool:
        return _edge(a, b) in self.edges

    def degree(self, node: str) -> int:
        return sum(1 for e in self.edges if node in e)

    def to_json(self) -> str:
        doc = {
            "nodes": sorted(self.nodes),
            "edges": sorted([list(e) for e in self.edges]),
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SimpleCityGraph":
        doc = json.loads(text)
        return cls.build(doc["nodes"], [tuple(e) for e in doc["edges"]])

    def to_dot(self, name: str = "G") -> str:
        lines = [f'graph "{name}" {{']
        for n in sorted(self.nodes):
            lines.append(f'  "{n}";')
        for a, b in sorted(self.edges):
            lines.append(f'  "{a}" -- "{b}";')
        lines.append("}")
        return "\n".join(lines)


@dataclass(frozen=True)
class GrowthSequence:
    """Order in which a rooted spanning tree accretes nodes.

    Each stage records the node added and the tree edge that attaches it
    to a previously added node.
    """

    root: str
    stages: tuple[tuple[str, tuple[str, str]], ...]

    def edge_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(e for _, e in self.stages)

    def as_graph(self, nodes) -> SimpleCityGraph:
        return SimpleCityGraph.build(nodes, self.edge_set())


def _check_no_duplicates(p: PointSet):
    seen = {}
    for pid, x, y in p.points:
        key = (x, y)
        if key in seen:
            raise DegeneratePointSetError(
                f"points {seen[key]!r} and {pid!r} share coordinates {key}"
            )
        seen[key] = pid


def _d2(a, b) -> float:
    return (a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2


def gabriel_graph(p: PointSet) -> SimpleCityGraph:
    """Gabriel graph: ab is an edge iff the disc with diameter ab is empty.

    A third point exactly on the disc boundary does not block the edge.
    """
    _check_no_duplicates(p)
    pts = p.points
    edges = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            a, b = pts[i][1:], pts[j][1:]
            mid = ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0)
            r2 = _d2(a, b) / 4.0
            blocked = any(
                _d2(mid, pts[k][1:]) < r2
                for k in range(len(pts))
                if k != i and k != j
            )
            if not blocked:
                edges.append((pts[i][0], pts[j][0]))
    return SimpleCityGraph.build(p.ids, edges)


def rng_graph(p: PointSet) -> SimpleCityGraph:
    """Relative neighbourhood graph: ab is an edge iff no c is strictly
    closer to both a and b than they are to each other."""
    _check_no_duplicates(p)
    pts = p.points
    edges = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            a, b = pts[i][1:], pts[j][1:]
            dab2 = _d2(a, b)
            blocked = any(
                max(_d2(a, pts[k][1:]), _d2(b, pts[k][1:])) < dab2
                for k in range(len(pts))
                if k != i and k != j
            )
            if not blocked:
                edges.append((pts[i][0], pts[j][0]))
    return SimpleCityGraph.build(p.ids, edges)


def _sorted_candidate_edges(p: PointSet):
    """All pairs sorted by (length, id pair) so equal lengths break ties
    on the lexicographically smaller canonical pair."""
    pts = p.points
    cands = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            e = _edge(pts[i][0], pts[j][0])
            cands.append((_d2(pts[i][1:], pts[j][1:]), e))
    cands.sort(key=lambda t: (t[0], t[1]))
    return cands


def emst(p: PointSet) -> SimpleCityGraph:
    """Euclidean minimum spanning tree (Kruskal, deterministic tie-break)."""
    _check_no_duplicates(p)
    parent = {pid: pid for pid in p.ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for _, (a, b) in _sorted_candidate_edges(p):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            edges.append((a, b))
            if len(edges) == len(p) - 1:
                break
    return SimpleCityGraph.build(p.ids, edges)


def prim_growth(p: PointSet, root: str) -> GrowthSequence:
    """Prim's algorithm from `root`, recording the attachment order.

    Uses the same (length, id pair) tie-break as `emst`, so the resulting
    edge set matches `emst(p)` whenever the MST is unique.
    """
    _check_no_duplicates(p)
    if root not in p.ids:
        raise KeyError(f"root {root!r} not in point set")
    coords = p.as_dict()
    in_tree = {root}
    stages = []
    while len(in_tree) < len(p):
        best = None
        for u in in_tree:
            for v in p.ids:
                if v in in_tree:
                    continue
                key = (_d2(coords[u], coords[v]), _edge(u, v))
                if best is None or key < best[0]:
                    best = (key, v, _edge(u, v))
        _, v, e = best
        in_tree.add(v)
        stages.append((v, e))
    return GrowthSequence(root=root, stages=tuple(stages))


def segments_cross(s1, s2) -> bool:
    """True iff the open segments properly intersect, i.e. they cross at a
    point that is not a shared endpoint.  Collinear overlap counts as a
    crossing; mere touching at an endpoint does not.
    """
    (p1, p2), (p3, p4) = s1, s2
    if p1 == p2 or p3 == p4:
        raise ValueError("zero-length segment")
    shared = {p1, p2} & {p3, p4}
    if shared:
        # Segments that meet at an endpoint cross only if they overlap
        # collinearly beyond the shared point.
        if len(shared) == 2:
            return False
        s = shared.pop()
        a = p2 if p1 == s else p1
        b = p4 if p3 == s else p3
        if _orient(s, a, b) != 0:
            return False
        # collinear: overlap iff a and b lie on the same side of s
        return (a[0] - s[0]) * (b[0] - s[0]) + (a[1] - s[1]) * (b[1] - s[1]) > 0

    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    if d1 == 0 and d2 == 0 and d3 == 0 and d4 == 0:
        return _collinear_overlap(p1, p2, p3, p4)
    # An (unshared) endpoint of one segment lying on the interior of the
    # other still counts as a crossing.
    return any(
        _on_open_segment(pt, *seg)
        for pt, seg in ((p1, (p3, p4)), (p2, (p3, p4)), (p3, (p1, p2)), (p4, (p1, p2)))
    )


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _on_open_segment(p, a, b) -> bool:
    if _orient(a, b, p) != 0 or p == a or p == b:
        return False
    return min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= p[1] <= max(
        a[1], b[1]
    )


def _collinear_overlap(p1, p2, p3, p4) -> bool:
    # project on the dominant axis
    axis = 0 if abs(p2[0] - p1[0]) >= abs(p2[1] - p1[1]) else 1
    lo1, hi1 = sorted((p1[axis], p2[axis]))
    lo2, hi2 = sorted((p3[axis], p4[axis]))
    return max(lo1, lo2) < min(hi1, hi2)


def straightline_planar(g: SimpleCityGraph, p: PointSet):
    """Check whether drawing g with straight segments at p's coordinates is
    crossing-free.  Returns (is_planar, crossing edge pairs); edges sharing
    an endpoint are never reported.
    """
    coords = p.as_dict()
    for n in g.nodes:
        if n not in coords:
            raise KeyError(f"no coordinates for node {n!r}")
    edges = sorted(g.edges)
    crossings = []
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            e1, e2 = edges[i], edges[j]
            if set(e1) & set(e2):
                continue
            s1 = (coords[e1[0]], coords[e1[1]])
            s2 = (coords[e2[0]], coords[e2[1]])
            if segments_cross(s1, s2):
                crossings.append((e1, e2))
    return (not crossings, crossings)
