"""P1 finite elements with lumped mass for ``-f'' + V f`` on a subgraph.

The discretized operator is the pencil (K, M): K symmetric (stiffness plus
lumped potential, plus delta strengths at vertex dofs) and M a positive
diagonal. Dofs are numbered by a Cuthill-McKee sweep so K is banded.

Only the diagonal of K depends on the potential, which is what makes the
Monte Carlo loop cheap: a sample rebuilds one vector, not the matrix.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .conditions import DISCRETIZABLE, ConditionField
from .graph import Subgraph


class AssemblyError(ValueError):
    pass


@dataclass
class Mesh:
    """Uniform subdivision of each edge plus the global dof map.

    ``node_dof[e][j]`` is the dof of node ``j`` on edge ``e`` (node 0 sits at
    ``iota``), or -1 where a Dirichlet vertex removed it.
    """

    n_sub: dict[int, int]
    h: dict[int, float]
    coords: dict[int, np.ndarray]
    node_dof: dict[int, np.ndarray]
    labels: list[tuple]
    bandwidth: int

    @property
    def n_dofs(self) -> int:
        return len(self.labels)


def _cuthill_mckee(n, adjacency):
    degree = [len(a) for a in adjacency]
    order = []
    seen = [False] * n
    # components in order of their lowest-degree (then lowest-index) node
    for start in sorted(range(n), key=lambda i: (degree[i], i)):
        if seen[start]:
            continue
        seen[start] = True
        queue = deque([start])
        while queue:
            i = queue.popleft()
            order.append(i)
            for j in sorted(adjacency[i], key=lambda j: (degree[j], j)):
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
    return order


def build_mesh(sub: Subgraph, h: float, conditions: ConditionField) -> Mesh:
    if not h > 0:
        raise AssemblyError("mesh size must be positive")
    conditions.check_against(sub.vertices, lambda v: sub.local_degree[v])
    for v in sub.vertices:
        if conditions[v].tag not in DISCRETIZABLE:
            raise AssemblyError(f"vertex {v}: condition {conditions[v].tag!r} cannot be discretized")

    labels: list[tuple] = []
    index: dict[tuple, int] = {}

    def dof(label):
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    n_sub, hs, coords, raw = {}, {}, {}, {}
    for e in sub.edges():
        # guard against l/h landing a rounding error above an integer
        n = max(2, math.ceil(e.length / h * (1.0 - 1e-12)))
        n_sub[e.id] = n
        hs[e.id] = e.length / n
        coords[e.id] = np.linspace(0.0, e.length, n + 1)
        ids = np.empty(n + 1, dtype=np.int64)
        for j, v in ((0, e.iota), (n, e.tau)):
            tag = conditions[v].tag
            if tag == "dirichlet":
                ids[j] = -1
            elif tag == "neumann":
                ids[j] = dof(("end", e.id, j))
            else:
                ids[j] = dof(("vertex", v))
        for j in range(1, n):
            ids[j] = dof(("node", e.id, j))
        raw[e.id] = ids

    n = len(labels)
    adjacency = [set() for _ in range(n)]
    for ids in raw.values():
        for a, b in zip(ids[:-1], ids[1:]):
            if a >= 0 and b >= 0 and a != b:
                adjacency[a].add(b)
                adjacency[b].add(a)
    order = _cuthill_mckee(n, adjacency)
    new_index = np.empty(n, dtype=np.int64)
    new_index[order] = np.arange(n)
    node_dof = {}
    bw = 0
    for eid, ids in raw.items():
        mapped = np.where(ids >= 0, new_index[np.maximum(ids, 0)], -1)
        node_dof[eid] = mapped
        for a, b in zip(mapped[:-1], mapped[1:]):
            if a >= 0 and b >= 0:
                bw = max(bw, abs(int(a) - int(b)))
    return Mesh(n_sub, hs, coords, node_dof, [labels[i] for i in order], bw)


@dataclass(frozen=True)
class Pencil:
    K: sp.csr_matrix
    m: np.ndarray
    bandwidth: int
    labels: tuple = field(default=(), compare=False)

    @property
    def n(self) -> int:
        return self.m.shape[0]

    def band(self) -> np.ndarray:
        """Lower band of K as ``W[i, d] = K[i + d, i]``."""
        n, bw = self.n, self.bandwidth
        W = np.zeros((n, bw + 1))
        for d in range(bw + 1):
            W[: n - d, d] = self.K.diagonal(-d)
        return W

    def dense(self) -> np.ndarray:
        return self.K.toarray()

    def with_diagonal_shift(self, extra: np.ndarray) -> "Pencil":
        return Pencil((self.K + sp.diags(extra)).tocsr(), self.m, self.bandwidth, self.labels)


class Discretization:
    """Potential-independent part of the pencil for one (subgraph, conditions, h).

    ``pencil(values)`` adds the lumped potential for per-edge node values;
    ``site_matrix`` maps site couplings to that diagonal directly.
    """

    def __init__(self, sub: Subgraph, conditions: ConditionField, h: float):
        self.sub = sub
        self.conditions = conditions
        self.mesh = mesh = build_mesh(sub, h, conditions)
        n = mesh.n_dofs
        rows, cols, vals = [], [], []
        m = np.zeros(n)
        for eid in sub.edge_ids:
            ids = mesh.node_dof[eid]
            he = mesh.h[eid]
            a, b = ids[:-1], ids[1:]
            k = 1.0 / he
            for r, c, v in ((a, a, k), (b, b, k), (a, b, -k), (b, a, -k)):
                keep = (r >= 0) & (c >= 0)
                rows.append(r[keep])
                cols.append(c[keep])
                vals.append(np.full(int(keep.sum()), v))
            np.add.at(m, a[a >= 0], 0.5 * he)
            np.add.at(m, b[b >= 0], 0.5 * he)
        for v in sub.vertices:
            cond = conditions[v]
            if cond.tag == "delta" and cond.alpha != 0.0:
                d = self._vertex_dof(v)
                rows.append(np.array([d]))
                cols.append(np.array([d]))
                vals.append(np.array([cond.alpha]))
        rows = np.concatenate(rows) if rows else np.zeros(0, int)
        cols = np.concatenate(cols) if cols else np.zeros(0, int)
        vals = np.concatenate(vals) if vals else np.zeros(0)
        K = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        K.sum_duplicates()
        # symmetric by construction, enforce bitwise anyway
        K = ((K + K.T) * 0.5).tocsr()
        if n and not np.all(m > 0):
            raise AssemblyError("lumped mass has a nonpositive entry")
        self.K0 = K
        self.m = m
        self._band0 = Pencil(K, m, mesh.bandwidth).band()
        self._site_cache = {}

    def _vertex_dof(self, v):
        for eid in self.sub.edge_ids:
            e = self.sub.parent.edge(eid)
            ids = self.mesh.node_dof[eid]
            if e.iota == v:
                return int(ids[0])
            if e.tau == v:
                return int(ids[-1])
        raise AssemblyError(f"vertex {v} not in subgraph")

    @property
    def n_dofs(self) -> int:
        return self.m.shape[0]

    def lumped_potential(self, values: Mapping[int, np.ndarray]) -> np.ndarray:
        """Diagonal contribution ``sum over element ends of (h/2) V(node)``."""
        out = np.zeros(self.n_dofs)
        for eid in self.sub.edge_ids:
            ids = self.mesh.node_dof[eid]
            v = np.asarray(values[eid], dtype=float)
            if v.shape != ids.shape:
                raise AssemblyError(f"edge {eid}: expected {ids.shape[0]} node values, got {v.shape}")
            if not np.all(np.isfinite(v)):
                raise AssemblyError(f"edge {eid}: non-finite potential value")
            he = self.mesh.h[eid]
            w = np.full(ids.shape[0], he)
            w[0] = w[-1] = 0.5 * he
            keep = ids >= 0
            np.add.at(out, ids[keep], (w * v)[keep])
        return out

    def pencil(self, values: Mapping[int, np.ndarray] | None = None) -> Pencil:
        if values is None:
            return Pencil(self.K0, self.m, self.mesh.bandwidth, tuple(self.mesh.labels))
        return Pencil((self.K0 + sp.diags(self.lumped_potential(values))).tocsr(),
                      self.m, self.mesh.bandwidth, tuple(self.mesh.labels))

    def band(self, diag_extra: np.ndarray | None = None) -> np.ndarray:
        W = self._band0.copy()
        if diag_extra is not None:
            W[:, 0] += diag_extra
        return W

    def site_matrix(self, model, sites) -> sp.csr_matrix:
        """Linear map from couplings (in ``sites`` order) to the lumped diagonal."""
        key = tuple(sites)
        if key not in self._site_cache:
            cols = []
            for s in sites:
                vals = {}
                for eid in self.sub.edge_ids:
                    piece = model.sites[s].pieces.get(eid)
                    x = self.mesh.coords[eid]
                    vals[eid] = piece(x) if piece is not None else np.zeros_like(x)
                cols.append(self.lumped_potential(vals))
            mat = np.column_stack(cols) if cols else np.zeros((self.n_dofs, 0))
            self._site_cache[key] = sp.csr_matrix(mat)
        return self._site_cache[key]


def assemble(sub: Subgraph, conditions: ConditionField, values: Mapping[int, np.ndarray] | None,
             h: float) -> Pencil:
    return Discretization(sub, conditions, h).pencil(values)


def constant_values(mesh: Mesh, c: float) -> dict[int, np.ndarray]:
    return {eid: np.full(x.shape, float(c)) for eid, x in mesh.coords.items()}


def profile_values(mesh: Mesh, profiles: Mapping) -> dict[int, np.ndarray]:
    """Node values of an edge-wise potential; missing edges are zero.

    ``profiles`` maps edge id to a number or a callable ``Profile``.
    """
    out = {}
    for eid, x in mesh.coords.items():
        p = profiles.get(eid, 0.0)
        out[eid] = p(x).astype(float) if callable(p) else np.full(x.shape, float(p))
    return out


def dump_triplets(pencil: Pencil, path) -> None:
    """Write ``K`` and ``M`` as ``i j value`` lines, one block each."""
    K = pencil.K.tocoo()
    with open(path, "w") as fh:
        fh.write(f"# K n={pencil.n} nnz={K.nnz}\n")
        for i, j, v in sorted(zip(K.row.tolist(), K.col.tolist(), K.data.tolist())):
            fh.write(f"{i} {j} {v!r}\n")
        fh.write(f"# M n={pencil.n}\n")
        for i, v in enumerate(pencil.m.tolist()):
            fh.write(f"{i} {i} {v!r}\n")
