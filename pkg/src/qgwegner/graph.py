"""Finite metric graphs, generators and edge-set restriction.

Vertices and edges carry opaque integer ids. Everything that depends on
iteration order walks ids in sorted order so results are reproducible.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping


class GraphError(ValueError):
    """Raised for malformed graph descriptions or edge sets."""


@dataclass(frozen=True)
class Edge:
    id: int
    iota: int
    tau: int
    length: float

    @property
    def is_loop(self) -> bool:
        return self.iota == self.tau


@dataclass(frozen=True)
class MetricGraph:
    """Finite metric graph; immutable after construction.

    Loops and multi-edges are allowed. A loop contributes two to the
    degree of its vertex.
    """

    vertices: tuple[int, ...]
    edges: tuple[Edge, ...]
    _edge_index: dict = field(init=False, repr=False, compare=False)
    _degree: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        index = {}
        degree = Counter({v: 0 for v in self.vertices})
        for e in self.edges:
            if e.id in index:
                raise GraphError(f"duplicate edge id {e.id}")
            for end in (e.iota, e.tau):
                if end not in vset:
                    raise GraphError(f"edge {e.id} references undeclared vertex {end}")
            if not (math.isfinite(e.length) and e.length > 0):
                raise GraphError(f"edge {e.id} has invalid length {e.length!r}")
            index[e.id] = e
            degree[e.iota] += 1
            degree[e.tau] += 1
        object.__setattr__(self, "_edge_index", index)
        object.__setattr__(self, "_degree", dict(degree))

    def edge(self, eid: int) -> Edge:
        try:
            return self._edge_index[eid]
        except KeyError:
            raise GraphError(f"unknown edge id {eid}") from None

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._edge_index))

    def has_edge(self, eid: int) -> bool:
        return eid in self._edge_index

    def degree(self, v: int) -> int:
        return self._degree[v]

    def incident_edges(self, v: int) -> list[int]:
        """Sorted ids of edges touching ``v`` (a loop is listed once)."""
        return sorted(e.id for e in self.edges if v in (e.iota, e.tau))

    def volume(self) -> float:
        return volume(self, self.edge_ids)

    def to_dict(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [
                {"id": e.id, "iota": e.iota, "tau": e.tau, "length": e.length}
                for e in self.edges
            ],
        }


def build_graph(vertex_ids: Iterable[int], edges: Iterable) -> MetricGraph:
    """Validate and build a graph.

    ``edges`` holds ``Edge`` instances, ``(id, iota, tau, length)`` tuples
    or mappings with exactly those keys.
    """
    parsed = []
    for item in edges:
        if isinstance(item, Edge):
            parsed.append(item)
        elif isinstance(item, Mapping):
            extra = set(item) - {"id", "iota", "tau", "length"}
            missing = {"id", "iota", "tau", "length"} - set(item)
            if extra or missing:
                raise GraphError(
                    f"edge entry {dict(item)!r}: unknown keys {sorted(extra)}, missing {sorted(missing)}"
                )
            parsed.append(Edge(int(item["id"]), int(item["iota"]), int(item["tau"]), float(item["length"])))
        else:
            eid, iota, tau, length = item
            parsed.append(Edge(int(eid), int(iota), int(tau), float(length)))
    parsed.sort(key=lambda e: e.id)
    return MetricGraph(tuple(sorted(int(v) for v in vertex_ids)), tuple(parsed))


def graph_from_dict(data: Mapping) -> MetricGraph:
    extra = set(data) - {"vertices", "edges"}
    if extra:
        raise GraphError(f"unknown graph keys: {sorted(extra)}")
    if "vertices" not in data or "edges" not in data:
        raise GraphError("graph needs 'vertices' and 'edges'")
    return build_graph(data["vertices"], data["edges"])


# -- generators ---------------------------------------------------------------

def path(n: int, length: float = 1.0) -> MetricGraph:
    """Chain of ``n`` edges; vertex k joins edges k-1 and k."""
    if n < 1:
        raise GraphError("path needs at least one edge")
    return build_graph(range(n + 1), [(k, k, k + 1, length) for k in range(n)])


def star(d: int, length: float = 1.0) -> MetricGraph:
    """Center vertex 0 with leaves 1..d; edge k-1 joins 0 and k."""
    if d < 1:
        raise GraphError("star needs at least one ray")
    return build_graph(range(d + 1), [(k - 1, 0, k, length) for k in range(1, d + 1)])


def grid(nx: int, ny: int, length: float = 1.0) -> MetricGraph:
    """Patch of the square lattice with ``nx`` by ``ny`` cells.

    Vertex (i, j) has id ``j * (nx + 1) + i``. Horizontal edges come first,
    then vertical ones, each row-major.
    """
    if nx < 1 or ny < 1:
        raise GraphError("grid needs nx, ny >= 1")
    vid = lambda i, j: j * (nx + 1) + i  # noqa: E731
    edges = []
    for j in range(ny + 1):
        for i in range(nx):
            edges.append((len(edges), vid(i, j), vid(i + 1, j), length))
    for j in range(ny):
        for i in range(nx + 1):
            edges.append((len(edges), vid(i, j), vid(i, j + 1), length))
    return build_graph(range((nx + 1) * (ny + 1)), edges)


def generate(kind: str, **params) -> MetricGraph:
    makers = {"path": path, "star": star, "grid": grid}
    if kind not in makers:
        raise GraphError(f"unknown generator {kind!r}")
    return makers[kind](**params)


# -- restriction --------------------------------------------------------------

@dataclass(frozen=True)
class Subgraph:
    parent: MetricGraph
    edge_ids: tuple[int, ...]
    vertices: tuple[int, ...]
    boundary: frozenset[int]
    interior: frozenset[int]
    local_degree: Mapping[int, int]

    @property
    def n_edges(self) -> int:
        return len(self.edge_ids)

    def edges(self) -> list[Edge]:
        return [self.parent.edge(e) for e in self.edge_ids]

    def volume(self) -> float:
        return volume(self.parent, self.edge_ids)


def restrict(graph: MetricGraph, edge_ids: Iterable[int]) -> Subgraph:
    """Induced subgraph on a finite edge set.

    A vertex of the subgraph is a boundary vertex when it lost at least one
    incident edge, i.e. its degree dropped relative to ``graph``.
    """
    ids = tuple(sorted(set(int(e) for e in edge_ids)))
    if not ids:
        raise GraphError("edge set must be nonempty")
    local = Counter()
    for eid in ids:
        if not graph.has_edge(eid):
            raise GraphError(f"edge {eid} is not an edge of the graph")
        e = graph.edge(eid)
        local[e.iota] += 1
        local[e.tau] += 1
    verts = tuple(sorted(local))
    boundary = frozenset(v for v in verts if local[v] < graph.degree(v))
    return Subgraph(
        parent=graph,
        edge_ids=ids,
        vertices=verts,
        boundary=boundary,
        interior=frozenset(verts) - boundary,
        local_degree=dict(local),
    )


def volume(graph: MetricGraph, edge_ids: Iterable[int]) -> float:
    """Sum of edge lengths, summed in sorted id order."""
    return math.fsum(graph.edge(e).length for e in sorted(set(edge_ids)))
