"""Aggregation and analysis of city graphs.

Per-run edge sets aggregate into a weighted graph whose edge weights are
exact rationals (occurrence count over run count).  Threshold graphs,
the reference road graph, subgraph/intersection relations, component
analysis and the findings report all live here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .geometry import PointSet, SimpleCityGraph, emst, gabriel_graph, rng_graph, straightline_planar


@dataclass(frozen=True)
class WeightedCityGraph:
    """Graph with edge occurrence counts over k experiments.

    weight(e) = count(e) / k as an exact Fraction; counts are kept so
    weights serialize in count/k form.
    """

    nodes: frozenset[str]
    counts: dict  # canonical edge pair -> occurrence count in [1, k]
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for (a, b), c in self.counts.items():
            if not (1 <= c <= self.k):
                raise ValueError(f"edge ({a}, {b}) count {c} outside [1, {self.k}]")
            if a not in self.nodes or b not in self.nodes:
                raise ValueError(f"edge ({a}, {b}) references unknown node")

    def weight(self, a: str, b: str) -> Fraction:
        e = (a, b) if a <= b else (b, a)
        return Fraction(self.counts.get(e, 0), self.k)

    @property
    def edges(self):
        return frozenset(self.counts)

    def to_json(self) -> str:
        doc = {
            "nodes": sorted(self.nodes),
            "k": self.k,
            "edges": [
                {
                    "pair": list(e),
                    "count": c,
                    "weight": f"{c}/{self.k}",
                    "weight_decimal": c / self.k,
                }
                for e, c in sorted(self.counts.items())
            ],
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "WeightedCityGraph":
        doc = json.loads(text)
        return cls(
            nodes=frozenset(doc["nodes"]),
            counts={tuple(e["pair"]): int(e["count"]) for e in doc["edges"]},
            k=int(doc["k"]),
        )


def aggregate(edge_sets: list[SimpleCityGraph], k: int | None = None) -> WeightedCityGraph:
    """Combine k per-run edge sets into occurrence-frequency weights."""
    if not edge_sets:
        raise ValueError("need at least one edge set")
    if k is None:
        k = len(edge_sets)
    if len(edge_sets) != k:
        raise ValueError(f"got {len(edge_sets)} edge sets for k = {k}")
    nodes = edge_sets[0].nodes
    for g in edge_sets[1:]:
        if g.nodes != nodes:
            raise ValueError("edge sets cover different node sets")
    counts: dict = {}
    for g in edge_sets:
        for e in g.edges:
            counts[e] = counts.get(e, 0) + 1
    return WeightedCityGraph(nodes=nodes, counts=counts, k=k)


def threshold(p: WeightedCityGraph, theta) -> SimpleCityGraph:
    """Keep edges with weight >= theta; all nodes are preserved."""
    theta = Fraction(theta)
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    edges = [e for e, c in p.counts.items() if Fraction(c, p.k) >= theta]
    return SimpleCityGraph.build(p.nodes, edges)


def load_road_graph(source, known_cities=None) -> SimpleCityGraph:
    """Load the reference road graph from a JSON edge-list document.

    The document holds {"nodes": [...], "edges": [[a, b], ...]} plus
    optional free-form "metadata".  When `known_cities` is given, every
    node must belong to it.
    """
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        text = Path(source).read_text()
    else:
        text = str(source)
    doc = json.loads(text)
    nodes = doc.get("nodes", [])
    edges = [tuple(e) for e in doc.get("edges", [])]
    if known_cities is not None:
        unknown = set(nodes) - set(known_cities)
        if unknown:
            raise ValueError(f"road graph names unknown cities: {sorted(unknown)}")
    return SimpleCityGraph.build(nodes, edges)


def intersect(g1: SimpleCityGraph, g2: SimpleCityGraph) -> SimpleCityGraph:
    if g1.nodes != g2.nodes:
        raise ValueError("graphs cover different node sets")
    return SimpleCityGraph(nodes=g1.nodes, edges=g1.edges & g2.edges)


def is_subgraph(g1: SimpleCityGraph, g2: SimpleCityGraph):
    """(g1's edges all appear in g2, missing edges)."""
    if g1.nodes != g2.nodes:
        raise ValueError("graphs cover different node sets")
    missing = sorted(g1.edges - g2.edges)
    return (not missing, missing)


def components(g: SimpleCityGraph) -> list[frozenset[str]]:
    """Connected components, largest first (ties by sorted members)."""
    adj = {n: set() for n in g.nodes}
    for a, b in g.edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = set()
    out = []
    for start in sorted(g.nodes):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if v not in comp:
                    comp.add(v)
                    stack.append(v)
        seen |= comp
        out.append(frozenset(comp))
    out.sort(key=lambda c: (-len(c), sorted(c)))
    return out


def isolated(g: SimpleCityGraph) -> frozenset[str]:
    return frozenset(n for c in components(g) if len(c) == 1 for n in c)


@dataclass
class FindingsReport:
    """Named boolean relations with witnesses for the failures."""

    relations: list = field(default_factory=list)  # (name, holds, witnesses, note)

    def add(self, name: str, holds: bool, witnesses=None, note: str = ""):
        if not holds and witnesses is None:
            raise ValueError("failed relation must list witnesses")
        self.relations.append((name, holds, witnesses or [], note))

    def add_info(self, name: str, value, note: str = ""):
        self.relations.append((name, value, [], note))

    def holds(self, name: str):
        for n, h, _, _ in self.relations:
            if n == name:
                return h
        raise KeyError(name)

    def to_json(self) -> str:
        return json.dumps(
            [
                {"relation": n, "result": h if isinstance(h, (bool, int, str)) else str(h),
                 "witnesses": [list(w) if isinstance(w, tuple) else w for w in ws],
                 "note": note}
                for n, h, ws, note in self.relations
            ],
            indent=2,
        )

    def to_text(self) -> str:
        lines = []
        for n, h, ws, note in self.relations:
            mark = {True: "PASS", False: "FAIL"}.get(h, str(h))
            line = f"{mark:>6}  {n}"
            if ws:
                line += f"  witnesses: {ws}"
            if note:
                line += f"  [{note}]"
            lines.append(line)
        return "\n".join(lines)


def _theta_grid(k: int):
    return [Fraction(c, k) for c in range(1, k + 1)]


def findings_report(p: WeightedCityGraph, v: WeightedCityGraph | None,
                    h: SimpleCityGraph | None, pointset: PointSet | None) -> FindingsReport:
    """Evaluate the inclusion, planarity and component relations over the
    supplied graphs.

    `p` is the aggregated experiment graph; `v` an optional second
    aggregate to compare against (e.g. the high-nutrient campaign);
    `h` the reference road graph; `pointset` city coordinates for the
    proximity graphs and planarity checks.  Missing inputs skip their
    relations.
    """
    rep = FindingsReport()
    k = p.k
    raw = threshold(p, Fraction(1, k))

    if h is not None:
        ok, missing = is_subgraph(h, raw)
        rep.add(f"road graph within raw P(1/{k})", ok, missing,
                note="fixture-dependent")
        strong_theta = Fraction(max(1, round(k / 3)), k)
        strong = threshold(p, strong_theta)
        ok, extra = is_subgraph(strong, h)
        rep.add(f"strong P({strong_theta}) within road graph", ok, extra,
                note="fixture-dependent")

    if pointset is not None:
        mst = emst(pointset)
        rng_g = rng_graph(pointset)
        gg = gabriel_graph(pointset)
        rep.add("MST equals RNG on city sites", mst.edges == rng_g.edges,
                sorted(mst.edges ^ rng_g.edges))
        ok1, w1 = is_subgraph(mst, rng_g)
        ok2, w2 = is_subgraph(rng_g, gg)
        ok3, w3 = is_subgraph(gg, raw)
        rep.add("MST within RNG", ok1, w1)
        rep.add("RNG within Gabriel graph", ok2, w2)
        rep.add(f"Gabriel graph within raw P(1/{k})", ok3, w3)

        if v is not None:
            mst_thetas = [
                theta for theta in _theta_grid(v.k)
                if is_subgraph(mst, threshold(v, theta))[0]
            ]
            rep.add_info(
                "largest theta with MST within V(theta)",
                str(max(mst_thetas)) if mst_thetas else "none",
            )

    # theta sweep over p: planarity, connectivity, components, isolation
    last_connected = None
    prev_components = None
    for theta in _theta_grid(k):
        g = threshold(p, theta)
        comps = components(g)
        if len(comps) == 1:
            last_connected = theta
        if pointset is not None:
            planar, crossings = straightline_planar(g, pointset)
            if not planar:
                rep.add_info(f"P({theta}) planar", False,
                             note=f"crossings: {crossings}")
        if prev_components is not None and len(comps) < prev_components:
            rep.add(f"components non-decreasing at theta={theta}", False,
                    [f"{prev_components} -> {len(comps)}"])
        prev_components = len(comps)
        iso = isolated(g)
        if iso:
            rep.add_info(f"P({theta}) isolated vertices", sorted(iso))
    rep.add_info("last connected theta",
                 str(last_connected) if last_connected is not None else "none")

    if v is not None:
        ok, missing = is_subgraph(threshold(p, Fraction(1, 2)),
                                  threshold(v, Fraction(1, 1)))
        rep.add_info("P(1/2) within V(1)", ok, note=f"missing: {missing}")
    return rep
