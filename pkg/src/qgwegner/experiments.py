"""Monte Carlo drivers: Wegner bound checks, finite-volume IDS curves and
the two spectral-shift lemmas, all on discretized pencils.

Per-sample work is independent and seeded by (seed, sample index), so the
thread count never changes a result: counts are gathered per index and
reduced in index order with integer sums.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from . import spectral
from .alloy import AlloyModel, Profile, check_covering, s_mu, sample_omega, summability_constants
from .assembly import Discretization, Pencil, profile_values
from .conditions import ConditionField, induce_on_subgraph
from .graph import MetricGraph, restrict

log = logging.getLogger(__name__)


class CoveringFailure(RuntimeError):
    pass


class BudgetExceeded(RuntimeError):
    pass


def _map_samples(fn, n, threads):
    if threads is None or threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


class _SampleCounter:
    """Counts ``#{eig < t}`` for all ``ts`` of one random pencil per sample."""

    def __init__(self, model: AlloyModel, disc: Discretization, sites, seed, oracle_dense=False):
        self.model = model
        self.disc = disc
        self.sites = list(sites)
        self.seed = seed
        self.oracle_dense = oracle_dense
        self.S = disc.site_matrix(model, self.sites)
        self.use_band = spectral._use_band(disc.n_dofs, disc.mesh.bandwidth)

    def pencil(self, index) -> tuple[Pencil, np.ndarray]:
        omega = sample_omega(self.model, self.sites, self.seed, index)
        w = np.array([omega[s] for s in self.sites])
        diag = self.S @ w if self.sites else np.zeros(self.disc.n_dofs)
        p = Pencil(self.disc.K0 + _diag(diag), self.disc.m, self.disc.mesh.bandwidth)
        return p, diag

    def counts(self, index, ts, oracle_dense=None):
        p, diag = self.pencil(index)
        dense = self.oracle_dense if oracle_dense is None else oracle_dense
        band = self.disc.band(diag) if self.use_band and not dense else None
        return spectral.count_below_many(p, ts, band=band, oracle_dense=dense)


def _diag(v):
    return sp.diags(v, format="csr")


# -- Wegner -------------------------------------------------------------------

@dataclass
class WegnerSet:
    """Aggregates for one edge set."""

    n_edges: int
    volume: float
    n_dofs: int
    kappa: float
    C1: float
    C2: float
    C3: float
    samples: int
    lambdas: np.ndarray
    epsilons: np.ndarray
    mean: np.ndarray        # (n_lambda, n_eps)
    stderr: np.ndarray
    s_mu_4eps: np.ndarray   # (n_eps,)
    oracle_mismatches: int = 0
    oracle_checked: int = 0

    @property
    def proof_constant(self) -> float:
        return self.C1 + self.C2 / math.pi + 5.0 * self.C3

    @property
    def bound(self) -> np.ndarray:
        """``s(mu, 4 eps / kappa) |Lambda|`` per epsilon."""
        return self.s_mu_4eps * self.n_edges

    @property
    def ratio(self) -> np.ndarray:
        b = self.bound[None, :]
        return np.divide(self.mean, b, out=np.full_like(self.mean, np.inf), where=b > 0)

    @property
    def max_mean(self) -> np.ndarray:
        return self.mean.max(axis=0)

    @property
    def max_ratio(self) -> np.ndarray:
        return self.ratio.max(axis=0)

    def proof_bound_violations(self) -> int:
        """Grid points where the mean count exceeds the proof-side bound,
        counted only where that bound is below the dof count."""
        pb = self.proof_constant * self.bound[None, :] * np.ones_like(self.mean)
        active = pb <= self.n_dofs
        return int(np.sum((self.mean > pb) & active))

    def slope(self) -> float:
        """Least-squares slope of log max_lambda(mean) against log eps."""
        mm = self.max_mean
        if len(self.epsilons) < 2 or np.any(mm <= 0):
            return math.nan
        return float(np.polyfit(np.log(self.epsilons), np.log(mm), 1)[0])


@dataclass
class WegnerReport:
    sets: list[WegnerSet]
    distribution: object
    seed: int

    def rows(self):
        for ws in self.sets:
            ratio = ws.ratio
            for i, lam in enumerate(ws.lambdas):
                for j, eps in enumerate(ws.epsilons):
                    yield {
                        "lambda": float(lam), "epsilon": float(eps), "n_edges": ws.n_edges,
                        "samples": ws.samples, "mean_count": float(ws.mean[i, j]),
                        "stderr": float(ws.stderr[i, j]), "s_mu_4eps": float(ws.s_mu_4eps[j]),
                        "bound": float(ws.bound[j]), "ratio": float(ratio[i, j]),
                    }


def _shift_table(lambdas, epsilons):
    lo = np.empty((len(lambdas), len(epsilons)))
    hi = np.empty_like(lo)
    for i, lam in enumerate(lambdas):
        for j, eps in enumerate(epsilons):
            lo[i, j], hi[i, j] = spectral.interval_shifts(float(lam), float(eps))
    ts, inv = np.unique(np.concatenate([lo.ravel(), hi.ravel()]), return_inverse=True)
    k = lo.size
    return ts, inv[:k].reshape(lo.shape), inv[k:].reshape(lo.shape)


def _aggregate(counts: np.ndarray):
    """Mean and standard error over axis 0 of an integer array."""
    s = counts.shape[0]
    total = counts.sum(axis=0, dtype=np.int64)
    mean = total / s
    if s < 2:
        return mean, np.full(mean.shape, np.nan)
    dev = counts - mean
    var = np.sum(dev * dev, axis=0) / (s - 1)
    return mean, np.sqrt(var / s)


def run_wegner(model: AlloyModel, conditions: ConditionField, edge_sets: Sequence[Sequence[int]],
               lambdas, epsilons, samples: int, seed: int, h: float, *, threads: int = 1,
               oracle_dense: bool = False, oracle_check: int = 0,
               budget_seconds: float | None = None) -> WegnerReport:
    """Averaged interval counts ``E[#eig in [lam-eps, lam+eps]]`` per edge set."""
    lambdas = np.asarray(lambdas, dtype=float)
    epsilons = np.asarray(epsilons, dtype=float)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if np.any(epsilons <= 0):
        raise ValueError("epsilons must be positive")
    if np.any(epsilons > 0.5):
        warnings.warn("epsilon > 1/2 is outside the range the Wegner bound covers", stacklevel=2)
    deadline = time.monotonic() + budget_seconds if budget_seconds else None
    ts, lo_idx, hi_idx = _shift_table(lambdas, epsilons)
    out = []
    for edges in edge_sets:
        sub = restrict(model.graph, edges)
        cover = check_covering(model, sub.edge_ids)
        if not cover.holds:
            raise CoveringFailure(f"covering fails on {len(sub.edge_ids)} edges: kappa = {cover.kappa}")
        summ = summability_constants(model, sub.edge_ids, cover)
        disc = Discretization(sub, induce_on_subgraph(conditions, sub), h)
        counter = _SampleCounter(model, disc, cover.sites, seed, oracle_dense)

        def work(i):
            if deadline is not None and time.monotonic() > deadline:
                raise BudgetExceeded(f"wall-clock budget of {budget_seconds} s exhausted")
            c = counter.counts(i, ts)
            return c[hi_idx] - c[lo_idx]

        counts = np.stack(_map_samples(work, samples, threads))
        mean, err = _aggregate(counts)
        mism = 0
        n_check = min(oracle_check, samples) if not oracle_dense else 0
        for i in range(n_check):
            ref = counter.counts(i, ts, oracle_dense=True)
            mism += int(np.sum((ref[hi_idx] - ref[lo_idx]) != counts[i]))
        s4 = np.array([s_mu(model.distribution, 4.0 * e / cover.kappa) for e in epsilons])
        ws = WegnerSet(len(sub.edge_ids), sub.volume(), disc.n_dofs, cover.kappa, summ.C1, summ.C2,
                       summ.C3, samples, lambdas, epsilons, mean, err, s4, mism, n_check)
        log.info("wegner |Lambda|=%d dofs=%d max ratio %s", ws.n_edges, ws.n_dofs, ws.max_ratio)
        out.append(ws)
    return WegnerReport(out, model.distribution, seed)


# -- integrated density of states --------------------------------------------

@dataclass
class IDSCurve:
    step: int
    n_edges: int
    volume: float
    samples: int
    lambdas: np.ndarray
    values: np.ndarray          # mean count_below(lam]) / volume
    stderr: np.ndarray
    increments: dict = field(default_factory=dict)  # eps -> mean (N(lam+eps) - N(lam))


def _closed(lam):
    return lam + (1.0 + abs(lam)) * spectral.INTERVAL_REL


def run_ids(model: AlloyModel, conditions: ConditionField, exhaustion: Sequence[Sequence[int]],
            lambdas, samples: int, seed: int, h: float, *, increment_eps: Sequence[float] = (),
            threads: int = 1, oracle_dense: bool = False) -> list[IDSCurve]:
    """Normalized counting functions ``#{eig <= lam} / vol`` along an exhaustion."""
    lambdas = np.asarray(lambdas, dtype=float)
    sets = [set(e) for e in exhaustion]
    for a, b in zip(sets, sets[1:]):
        if not a <= b:
            raise ValueError("exhaustion must be nested")
    pts = [lambdas] + [lambdas + e for e in increment_eps]
    ts = np.array([_closed(float(x)) for x in np.concatenate(pts)])
    nl = len(lambdas)
    curves = []
    for step, edges in enumerate(exhaustion, start=1):
        sub = restrict(model.graph, edges)
        cover = check_covering(model, sub.edge_ids)
        disc = Discretization(sub, induce_on_subgraph(conditions, sub), h)
        counter = _SampleCounter(model, disc, cover.sites, seed, oracle_dense)
        counts = np.stack(_map_samples(lambda i: counter.counts(i, ts), samples, threads))
        vol = sub.volume()
        base = counts[:, :nl]
        mean, err = _aggregate(base)
        incr = {}
        for q, e in enumerate(increment_eps, start=1):
            m_inc, _ = _aggregate(counts[:, q * nl:(q + 1) * nl] - base)
            incr[float(e)] = m_inc / vol
        curves.append(IDSCurve(step, len(sub.edge_ids), vol, samples, lambdas, mean / vol, err / vol, incr))
    return curves


def self_convergence(curves: Sequence[IDSCurve]) -> list[float]:
    """Sup distance between consecutive curves of an exhaustion."""
    return [float(np.max(np.abs(a.values - b.values))) for a, b in zip(curves, curves[1:])]


# -- spectral shift lemmas ----------------------------------------------------

Potential = Mapping[int, "Profile | float"]


def _sup(W: Potential) -> float:
    vals = [max(abs(v) for v in p.values) if isinstance(p, Profile) else abs(float(p)) for p in W.values()]
    return max(vals, default=0.0)


def _pencils(graph, cond_field, edges, W1, W2, h):
    sub = restrict(graph, edges)
    disc = Discretization(sub, induce_on_subgraph(cond_field, sub), h)
    return (disc.pencil(profile_values(disc.mesh, W1)),
            disc.pencil(profile_values(disc.mesh, W2)), sub)


@dataclass
class LemmaReport:
    lemma: str
    fixture: str
    lambdas: np.ndarray
    xi: np.ndarray
    bound: np.ndarray
    xi_local: np.ndarray | None = None
    boundary_term: float = 0.0

    @property
    def failures(self) -> int:
        return int(np.sum(np.abs(self.xi) > self.bound))

    @property
    def ok(self) -> bool:
        return self.failures == 0


def _differs(W1: Potential, W2: Potential, e) -> bool:
    a, b = W1.get(e, 0.0), W2.get(e, 0.0)
    if isinstance(a, Profile) or isinstance(b, Profile):
        pa = a if isinstance(a, Profile) else Profile.constant(float(a))
        pb = b if isinstance(b, Profile) else Profile.constant(float(b))
        cuts = np.array(sorted(set(pa.breaks) | set(pb.breaks)))
        return bool(np.any(pa(cuts) != pb(cuts)))
    return float(a) != float(b)


def verify_lemma_graph(graph: MetricGraph, conditions: ConditionField, region: Sequence[int],
                       W1: Potential, W2: Potential, lambdas, h: float, *, name: str = "",
                       oracle_dense: bool = False) -> LemmaReport:
    """|xi(H1, H2)| <= sum of boundary degrees + |xi(h1, h2)| on a lambda grid.

    H_j live on the whole graph; h_j are their restrictions to ``region``
    with Dirichlet conditions at the region's boundary vertices.
    """
    region = sorted(set(region))
    outside = [e for e in graph.edge_ids if e not in region and _differs(W1, W2, e)]
    if outside:
        raise ValueError(f"W2 - W1 is supported outside the region, on edges {outside}")
    lambdas = np.asarray(lambdas, dtype=float)
    P1, P2, _ = _pencils(graph, conditions, graph.edge_ids, W1, W2, h)
    p1, p2, sub = _pencils(graph, conditions, region, W1, W2, h)
    xi = spectral.ssf(P1, P2, lambdas, oracle_dense=oracle_dense).values
    xi_loc = spectral.ssf(p1, p2, lambdas, oracle_dense=oracle_dense).values
    term = float(sum(graph.degree(v) for v in sorted(sub.boundary)))
    return LemmaReport("graph", name, lambdas, xi, term + np.abs(xi_loc), xi_loc, term)


def verify_lemma_edge(graph: MetricGraph, conditions: ConditionField, W1: Potential, W2: Potential,
                      lambdas, h: float, *, name: str = "", oracle_dense: bool = False) -> LemmaReport:
    """|xi(H1, H2)| <= (sqrt|W1| + sqrt|W2|) vol / pi + 5 |E| on a lambda grid."""
    lambdas = np.asarray(lambdas, dtype=float)
    P1, P2, sub = _pencils(graph, conditions, graph.edge_ids, W1, W2, h)
    xi = spectral.ssf(P1, P2, lambdas, oracle_dense=oracle_dense).values
    b = (math.sqrt(_sup(W1)) + math.sqrt(_sup(W2))) * sub.volume() / math.pi + 5.0 * len(sub.edge_ids)
    return LemmaReport("edge", name, lambdas, xi, np.full(len(lambdas), b))
