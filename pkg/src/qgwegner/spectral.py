"""Eigenvalue counting for symmetric pencils (K, M) with M positive diagonal.

``count_below(p, t)`` is the number of pencil eigenvalues strictly below
``t``. By Sylvester's law of inertia it equals the number of negative
eigenvalues of ``K - t M``, read off a symmetric-indefinite LDL^T
factorization with 1x1 and 2x2 pivots. The band kernel is used when the
dof ordering makes K narrow, the Bunch-Kaufman dense kernel otherwise.

``eigenvalues_dense`` is the independent oracle: Householder reduction to
tridiagonal form followed by implicit QL.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .assembly import Pencil

MAX_NUDGES = 3
NUDGE_REL = 1e-12
INTERVAL_REL = 1e-10
DENSE_CAP = 3000


class InertiaBreakdown(ArithmeticError):
    def __init__(self, t, tried):
        super().__init__(f"zero pivot at shift {t!r} after nudges {tried!r}")
        self.t = t
        self.tried = tried


class DenseCapExceeded(ValueError):
    pass


def _use_band(n, bw):
    return 2 * bw < n


def _spectral_scale(pencil: Pencil) -> float:
    kmax = float(np.max(np.abs(pencil.K.data), initial=0.0))
    return kmax / float(np.min(pencil.m)) if pencil.n else 0.0


def _nudges(t, scale):
    """Shifts tried after a zero pivot: strictly downward, growing by 8x."""
    base = NUDGE_REL * (1.0 + abs(t) + scale)
    return [t - base * 8.0 ** k for k in range(MAX_NUDGES)]


def _raw_counts(pencil: Pencil, ts: np.ndarray, band: np.ndarray | None) -> np.ndarray:
    if band is not None:
        return kernels.band_count_many(band, pencil.m, ts)
    dense = pencil.dense()
    out = np.empty(len(ts), dtype=np.int64)
    for q, t in enumerate(ts):
        A = dense - np.diag(t * pencil.m)
        out[q] = kernels.dense_inertia(np.ascontiguousarray(A))
    return out


def count_below_many(pencil: Pencil, ts, *, band: np.ndarray | None = None,
                     oracle_dense: bool = False) -> np.ndarray:
    """Vector version of :func:`count_below`.

    ``band`` may pass a precomputed ``pencil.band()``; ``oracle_dense``
    counts from the dense eigenvalues instead of factorizations.
    """
    ts = np.ascontiguousarray(ts, dtype=float)
    if pencil.n == 0:
        return np.zeros(len(ts), dtype=np.int64)
    if oracle_dense:
        ev = eigenvalues_dense(pencil)
        return np.searchsorted(ev, ts, side="left").astype(np.int64)
    if band is None and _use_band(pencil.n, pencil.bandwidth):
        band = pencil.band()
    out = _raw_counts(pencil, ts, band)
    bad = np.flatnonzero(out < 0)
    if bad.size:
        scale = _spectral_scale(pencil)
        for q in bad:
            tried = _nudges(float(ts[q]), scale)
            for t in tried:
                c = int(_raw_counts(pencil, np.array([t]), band)[0])
                if c >= 0:
                    out[q] = c
                    break
            else:
                raise InertiaBreakdown(float(ts[q]), tried)
    return out


def count_below(pencil: Pencil, t: float, **kw) -> int:
    """Number of pencil eigenvalues strictly below ``t``."""
    return int(count_below_many(pencil, [t], **kw)[0])


def interval_shifts(lam: float, eps: float) -> tuple[float, float]:
    delta = (1.0 + abs(lam) + eps) * INTERVAL_REL
    return lam - eps - delta, lam + eps + delta


def count_interval(pencil: Pencil, lam: float, eps: float, **kw) -> int:
    """Eigenvalues in the closed interval ``[lam - eps, lam + eps]``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    lo, hi = interval_shifts(lam, eps)
    c = count_below_many(pencil, [lo, hi], **kw)
    return int(c[1] - c[0])


# -- dense oracle -------------------------------------------------------------

def tridiagonalize(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction of a symmetric matrix; returns (diag, offdiag)."""
    A = np.array(A, dtype=float, copy=True)
    n = A.shape[0]
    for k in range(n - 2):
        x = A[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        vnorm2 = v @ v
        if vnorm2 == 0.0:
            continue
        beta = 2.0 / vnorm2
        S = A[k + 1:, k + 1:]
        p = beta * (S @ v)
        w = p - (0.5 * beta * (p @ v)) * v
        S -= np.outer(v, w) + np.outer(w, v)
        A[k + 1, k] = A[k, k + 1] = alpha
        A[k + 2:, k] = 0.0
        A[k, k + 2:] = 0.0
    return np.diag(A).copy(), np.append(np.diag(A, -1), 0.0)


def symmetric_eigenvalues(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    if n == 0:
        return np.zeros(0)
    if np.count_nonzero(np.triu(A, 2)) == 0:
        d, e = np.diag(A).astype(float).copy(), np.append(np.diag(A, -1), 0.0).astype(float)
    else:
        d, e = tridiagonalize(A)
    d = np.ascontiguousarray(d)
    e = np.ascontiguousarray(e)
    if kernels.tql_eigenvalues(d, e) != 0:
        raise ArithmeticError("implicit QL did not converge")
    return np.sort(d)


def eigenvalues_dense(pencil: Pencil, cap: int = DENSE_CAP) -> np.ndarray:
    """All generalized eigenvalues, ascending, via ``M^{-1/2} K M^{-1/2}``."""
    if pencil.n > cap:
        raise DenseCapExceeded(f"{pencil.n} dofs exceed the dense cap {cap}")
    s = 1.0 / np.sqrt(pencil.m)
    A = pencil.dense() * s[:, None] * s[None, :]
    return symmetric_eigenvalues(0.5 * (A + A.T))


# -- spectral shift -----------------------------------------------------------

@dataclass(frozen=True)
class SSFCurve:
    lambdas: np.ndarray
    values: np.ndarray

    @property
    def sup(self) -> int:
        return int(np.max(np.abs(self.values), initial=0))


def ssf(p1: Pencil, p2: Pencil, lambdas, **kw) -> SSFCurve:
    """``xi(lam) = N_1(lam) - N_2(lam)`` on a grid, for pencils sharing M."""
    if p1.n != p2.n or not np.array_equal(p1.m, p2.m):
        raise ValueError("pencils must share the dof layout and mass matrix")
    lambdas = np.asarray(lambdas, dtype=float)
    xi = count_below_many(p1, lambdas, **kw) - count_below_many(p2, lambdas, **kw)
    return SSFCurve(lambdas, xi)


def counting_function(pencil: Pencil, lambdas, **kw) -> np.ndarray:
    return count_below_many(pencil, np.asarray(lambdas, dtype=float), **kw)
