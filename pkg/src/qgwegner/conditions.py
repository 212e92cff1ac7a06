"""Self-adjoint single-vertex conditions in kernel form ``A s + B s' = 0``.

``s`` collects the boundary values of the incident edge ends at a vertex
and ``s'`` the inward derivatives. A pair (A, B) describes a self-adjoint
condition iff ``[A | B]`` has full row rank and ``A B^*`` is Hermitian.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .graph import MetricGraph, Subgraph

TAGS = ("dirichlet", "neumann", "kirchhoff", "delta", "general")
DISCRETIZABLE = ("dirichlet", "neumann", "kirchhoff", "delta")

RANK_RTOL = 1e-10
HERMITIAN_RTOL = 1e-12


class ConditionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class VertexCondition:
    A: np.ndarray
    B: np.ndarray
    tag: str = "general"
    alpha: float = 0.0

    @property
    def degree(self) -> int:
        return self.A.shape[0]

    def __repr__(self):
        if self.tag == "delta":
            return f"VertexCondition(delta, d={self.degree}, alpha={self.alpha})"
        return f"VertexCondition({self.tag}, d={self.degree})"


def _check_degree(d):
    if int(d) != d or d < 1:
        raise ConditionError(f"vertex degree must be a positive integer, got {d!r}")
    return int(d)


def dirichlet(d: int) -> VertexCondition:
    d = _check_degree(d)
    return VertexCondition(np.eye(d, dtype=complex), np.zeros((d, d), complex), "dirichlet")


def neumann(d: int) -> VertexCondition:
    d = _check_degree(d)
    return VertexCondition(np.zeros((d, d), complex), np.eye(d, dtype=complex), "neumann")


def delta(d: int, alpha: float) -> VertexCondition:
    """Continuity plus ``sum(s') = alpha * s_1``; alpha > 0 is repulsive."""
    d = _check_degree(d)
    alpha = float(alpha)
    if not np.isfinite(alpha):
        raise ConditionError("delta strength must be finite")
    A = np.zeros((d, d), complex)
    B = np.zeros((d, d), complex)
    for i in range(d - 1):
        A[i, i], A[i, i + 1] = 1.0, -1.0
    A[d - 1, 0] = -alpha
    B[d - 1, :] = 1.0
    return VertexCondition(A, B, "delta", alpha)


def kirchhoff(d: int) -> VertexCondition:
    c = delta(d, 0.0)
    return VertexCondition(c.A, c.B, "kirchhoff", 0.0)


def general(A, B) -> VertexCondition:
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ConditionError(f"A and B must be square of equal size, got {A.shape} and {B.shape}")
    return VertexCondition(A, B, "general")


def make(tag: str, d: int, alpha: float | None = None) -> VertexCondition:
    if tag == "dirichlet":
        return dirichlet(d)
    if tag == "neumann":
        return neumann(d)
    if tag == "kirchhoff":
        return kirchhoff(d)
    if tag == "delta":
        if alpha is None:
            raise ConditionError("delta condition needs alpha")
        return delta(d, alpha)
    raise ConditionError(f"unknown condition tag {tag!r}")


@dataclass(frozen=True)
class ValidationReport:
    rank: int
    degree: int
    hermitian_defect: float
    hermitian_tol: float

    @property
    def rank_ok(self) -> bool:
        return self.rank == self.degree

    @property
    def hermitian_ok(self) -> bool:
        return self.hermitian_defect <= self.hermitian_tol

    @property
    def ok(self) -> bool:
        return self.rank_ok and self.hermitian_ok

    def failures(self) -> list[str]:
        out = []
        if not self.rank_ok:
            out.append(f"rank[A|B] = {self.rank} != {self.degree}")
        if not self.hermitian_ok:
            out.append(f"A B* not Hermitian (defect {self.hermitian_defect:.3g})")
        return out


def validate(cond: VertexCondition) -> ValidationReport:
    A, B = cond.A, cond.B
    d = A.shape[0]
    sv = np.linalg.svd(np.hstack([A, B]), compute_uv=False)
    rank = int(np.sum(sv > RANK_RTOL * sv[0])) if sv.size and sv[0] > 0 else 0
    ABh = A @ B.conj().T
    defect = float(np.max(np.abs(ABh - ABh.conj().T))) if d else 0.0
    tol = HERMITIAN_RTOL * (1.0 + np.linalg.norm(A, 2) * np.linalg.norm(B, 2))
    return ValidationReport(rank, d, defect, float(tol))


def same_subspace(c1: VertexCondition, c2: VertexCondition) -> bool:
    """True when both pairs cut out the same subspace of C^d x C^d."""
    if c1.degree != c2.degree:
        return False
    stacked = np.vstack([np.hstack([c1.A, c1.B]), np.hstack([c2.A, c2.B])])
    sv = np.linalg.svd(stacked, compute_uv=False)
    return int(np.sum(sv > RANK_RTOL * sv[0])) == c1.degree


def in_subspace(cond: VertexCondition, s, sp, tol: float = 1e-12) -> bool:
    r = cond.A @ np.asarray(s, complex) + cond.B @ np.asarray(sp, complex)
    return bool(np.max(np.abs(r), initial=0.0) <= tol)


@dataclass(frozen=True)
class ConditionField:
    """One condition per vertex, keyed by vertex id."""

    conditions: Mapping[int, VertexCondition] = field(default_factory=dict)

    def __getitem__(self, v: int) -> VertexCondition:
        return self.conditions[v]

    def __contains__(self, v) -> bool:
        return v in self.conditions

    def tags(self) -> dict[int, str]:
        return {v: c.tag for v, c in sorted(self.conditions.items())}

    def check_against(self, vertices, degree_of) -> None:
        for v in vertices:
            if v not in self.conditions:
                raise ConditionError(f"no condition for vertex {v}")
            if self.conditions[v].degree != degree_of(v):
                raise ConditionError(
                    f"vertex {v}: condition degree {self.conditions[v].degree} != vertex degree {degree_of(v)}"
                )


def uniform_field(graph: MetricGraph, tag: str = "kirchhoff", *, alpha: float | None = None,
                  overrides: Mapping[int, VertexCondition] | None = None) -> ConditionField:
    conds = {v: make(tag, graph.degree(v), alpha) for v in graph.vertices if graph.degree(v) > 0}
    conds.update(overrides or {})
    out = ConditionField(conds)
    out.check_against([v for v in graph.vertices if graph.degree(v) > 0], graph.degree)
    return out


def leaf_dirichlet_field(graph: MetricGraph, tag: str = "kirchhoff") -> ConditionField:
    """``tag`` everywhere except Dirichlet on degree-one vertices."""
    leaves = {v: dirichlet(1) for v in graph.vertices if graph.degree(v) == 1}
    return uniform_field(graph, tag, overrides=leaves)


def induce_on_subgraph(cond_field: ConditionField, sub: Subgraph) -> ConditionField:
    """Keep parent conditions at interior vertices, Dirichlet at boundary ones."""
    out = {}
    for v in sub.vertices:
        d_loc = sub.local_degree[v]
        if v in sub.boundary:
            out[v] = dirichlet(d_loc)
            continue
        if v not in cond_field:
            raise ConditionError(f"no condition for interior vertex {v}")
        c = cond_field[v]
        if c.degree != d_loc:
            raise ConditionError(
                f"interior vertex {v} has degree {d_loc} but its condition has degree {c.degree}"
            )
        out[v] = c
    return ConditionField(out)


def _complex_matrix(rows):
    def conv(x):
        if isinstance(x, (list, tuple)):
            re, im = x
            return complex(float(re), float(im))
        if isinstance(x, str):
            return complex(x.replace(" ", ""))
        return complex(x)
    return np.array([[conv(x) for x in row] for row in rows], dtype=complex)


def condition_from_dict(data: Mapping, degree: int) -> VertexCondition:
    """Parse ``{type, alpha?}`` or ``{type: general, A, B}``.

    Complex entries may be numbers, ``[re, im]`` pairs or strings like "1+2j".
    """
    allowed = {"type", "alpha", "A", "B"}
    extra = set(data) - allowed
    if extra:
        raise ConditionError(f"unknown condition keys {sorted(extra)}")
    tag = data.get("type")
    if tag == "general":
        if "A" not in data or "B" not in data:
            raise ConditionError("general condition needs A and B")
        cond = general(_complex_matrix(data["A"]), _complex_matrix(data["B"]))
        if cond.degree != degree:
            raise ConditionError(f"general condition has size {cond.degree}, vertex degree is {degree}")
        return cond
    if tag not in DISCRETIZABLE:
        raise ConditionError(f"unknown condition type {tag!r}")
    if tag != "delta" and "alpha" in data:
        raise ConditionError(f"alpha only applies to delta conditions, not {tag!r}")
    return make(tag, degree, data.get("alpha"))
