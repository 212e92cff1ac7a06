"""Alloy-type random potentials ``V_omega = sum_e omega_e u_e``.

Single-site profiles are nonnegative and piecewise constant on each edge,
so sup norms, supports and the covering infimum are exact breakpoint scans.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Union

import numpy as np

from .graph import MetricGraph, restrict


class AlloyError(ValueError):
    pass


@dataclass(frozen=True)
class Profile:
    """Piecewise-constant function on one edge: ``values[i]`` on ``[breaks[i], breaks[i+1])``."""

    breaks: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.breaks) != len(self.values) or not self.breaks:
            raise AlloyError("profile needs one value per breakpoint")
        if self.breaks[0] != 0.0:
            raise AlloyError("first breakpoint must be 0")
        if any(b >= c for b, c in zip(self.breaks, self.breaks[1:])):
            raise AlloyError("breakpoints must increase strictly")
        if any(not math.isfinite(v) or v < 0 for v in self.values):
            raise AlloyError("single-site potentials must be finite and nonnegative")

    @classmethod
    def constant(cls, value: float) -> "Profile":
        return cls((0.0,), (float(value),))

    def __call__(self, x):
        """Right-continuous evaluation; the far endpoint takes the last value."""
        idx = np.searchsorted(np.asarray(self.breaks), x, side="right") - 1
        return np.asarray(self.values)[np.clip(idx, 0, len(self.values) - 1)]

    def is_zero(self) -> bool:
        return all(v == 0.0 for v in self.values)


@dataclass(frozen=True)
class SingleSitePotential:
    site: int
    pieces: Mapping[int, Profile]

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(e for e, p in self.pieces.items() if not p.is_zero()))

    @property
    def sup_norm(self) -> float:
        return max((max(p.values) for p in self.pieces.values()), default=0.0)


# -- coupling distributions ---------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise AlloyError("Uniform needs a < b")

    @property
    def support(self):
        return (self.a, self.b)

    def ppf(self, u):
        return self.a + (self.b - self.a) * u

    def measure(self, lo, hi):
        """mu([lo, hi])"""
        lo, hi = max(lo, self.a), min(hi, self.b)
        return max(hi - lo, 0.0) / (self.b - self.a)


@dataclass(frozen=True)
class TwoPoint:
    """Atoms at ``a`` (mass 1-p) and ``b`` (mass p)."""

    a: float = 0.0
    b: float = 1.0
    p: float = 0.5

    def __post_init__(self):
        if not self.a < self.b:
            raise AlloyError("TwoPoint needs a < b")
        if not 0.0 <= self.p <= 1.0:
            raise AlloyError("TwoPoint needs p in [0, 1]")

    @property
    def support(self):
        return (self.a, self.b)

    def ppf(self, u):
        return np.where(np.asarray(u) < 1.0 - self.p, self.a, self.b)

    def measure(self, lo, hi):
        return (1.0 - self.p) * (lo <= self.a <= hi) + self.p * (lo <= self.b <= hi)


@dataclass(frozen=True)
class PowerLaw:
    """Density ``alpha x**(alpha-1)`` on [0, 1]; Hoelder-alpha distribution function."""

    alpha: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise AlloyError("PowerLaw needs alpha in (0, 1]")

    @property
    def support(self):
        return (0.0, 1.0)

    def ppf(self, u):
        return np.asarray(u) ** (1.0 / self.alpha)

    def cdf(self, x):
        return np.clip(x, 0.0, 1.0) ** self.alpha

    def measure(self, lo, hi):
        return max(float(self.cdf(hi) - self.cdf(lo)), 0.0)


Distribution = Union[Uniform, TwoPoint, PowerLaw]


def distribution_from_dict(data: Mapping) -> Distribution:
    families = {"uniform": (Uniform, {"a", "b"}), "two_point": (TwoPoint, {"a", "b", "p"}),
                "power_law": (PowerLaw, {"alpha"})}
    family = data.get("family")
    if family not in families:
        raise AlloyError(f"unknown distribution family {family!r}; expected one of {sorted(families)}")
    cls, keys = families[family]
    params = data.get("params", {})
    extra = (set(data) - {"family", "params"}) | (set(params) - keys)
    if extra:
        raise AlloyError(f"unknown distribution keys {sorted(extra)}")
    return cls(**{k: float(v) for k, v in params.items()})


def distribution_to_dict(dist: Distribution) -> dict:
    if isinstance(dist, Uniform):
        return {"family": "uniform", "params": {"a": dist.a, "b": dist.b}}
    if isinstance(dist, TwoPoint):
        return {"family": "two_point", "params": {"a": dist.a, "b": dist.b, "p": dist.p}}
    return {"family": "power_law", "params": {"alpha": dist.alpha}}


def s_mu(dist: Distribution, eps: float) -> float:
    """Largest mass ``dist`` gives to a closed interval of length ``2 eps``."""
    if not eps > 0:
        raise AlloyError("eps must be positive")
    if isinstance(dist, Uniform):
        return min(2.0 * eps / (dist.b - dist.a), 1.0)
    if isinstance(dist, TwoPoint):
        return max(dist.p, 1.0 - dist.p) if 2.0 * eps < dist.b - dist.a else 1.0
    if isinstance(dist, PowerLaw):
        # concave distribution function: increments are largest at the left end
        return min((2.0 * eps) ** dist.alpha, 1.0)
    raise AlloyError(f"unsupported distribution {dist!r}")


# -- the model ----------------------------------------------------------------

@dataclass(frozen=True)
class AlloyModel:
    graph: MetricGraph
    sites: Mapping[int, SingleSitePotential]
    distribution: Distribution

    def __post_init__(self):
        for eid in self.graph.edge_ids:
            if eid not in self.sites:
                raise AlloyError(f"edge {eid} has no single-site potential")
        for s in self.sites.values():
            if not self.graph.has_edge(s.site):
                raise AlloyError(f"site {s.site} is not an edge")
            for eid, prof in s.pieces.items():
                length = self.graph.edge(eid).length
                if prof.breaks[-1] >= length:
                    raise AlloyError(f"site {s.site}: breakpoint beyond edge {eid} length {length}")

    def sites_on_edge(self, eid: int) -> list[int]:
        return [s for s in sorted(self.sites) if eid in self.sites[s].pieces
                and not self.sites[s].pieces[eid].is_zero()]


def indicator_sites(graph: MetricGraph, height: float = 1.0) -> dict[int, SingleSitePotential]:
    """``u_e = height * chi_e``"""
    return {e: SingleSitePotential(e, {e: Profile.constant(height)}) for e in graph.edge_ids}


def overlap_sites(graph: MetricGraph, own: float = 1.0, neighbor: float = 0.5) -> dict[int, SingleSitePotential]:
    """``u_e = own * chi_e + neighbor * chi_{edges sharing a vertex with e}``"""
    out = {}
    for eid in graph.edge_ids:
        e = graph.edge(eid)
        pieces = {eid: Profile.constant(own)}
        for v in {e.iota, e.tau}:
            for f in graph.incident_edges(v):
                if f != eid:
                    pieces[f] = Profile.constant(neighbor)
        out[eid] = SingleSitePotential(eid, dict(sorted(pieces.items())))
    return out


def sites_from_dict(graph: MetricGraph, data) -> dict[int, SingleSitePotential]:
    """Templated (``{template: indicator|overlap, ...}``) or explicit site list."""
    if isinstance(data, Mapping):
        data = dict(data)
        tmpl = data.pop("template", None)
        if tmpl == "indicator":
            extra = set(data) - {"height"}
            if extra:
                raise AlloyError(f"unknown keys for indicator template: {sorted(extra)}")
            return indicator_sites(graph, float(data.get("height", 1.0)))
        if tmpl == "overlap":
            extra = set(data) - {"own", "neighbor"}
            if extra:
                raise AlloyError(f"unknown keys for overlap template: {sorted(extra)}")
            return overlap_sites(graph, float(data.get("own", 1.0)), float(data.get("neighbor", 0.5)))
        raise AlloyError(f"unknown site template {tmpl!r}")
    out = {}
    for entry in data:
        extra = set(entry) - {"site", "pieces"}
        if extra:
            raise AlloyError(f"unknown site keys {sorted(extra)}")
        pieces = {}
        for piece in entry["pieces"]:
            extra = set(piece) - {"edge", "breaks", "values"}
            if extra:
                raise AlloyError(f"unknown piece keys {sorted(extra)}")
            breaks = tuple(float(b) for b in piece.get("breaks", [0.0]))
            pieces[int(piece["edge"])] = Profile(breaks, tuple(float(v) for v in piece["values"]))
        site = int(entry["site"])
        out[site] = SingleSitePotential(site, pieces)
    for eid in graph.edge_ids:
        out.setdefault(eid, SingleSitePotential(eid, {}))
    return out


# -- sampling -----------------------------------------------------------------

def sample_omega(model: AlloyModel, edges: Iterable[int], seed: int, index: int) -> dict[int, float]:
    """One i.i.d. coupling per edge, a pure function of (seed, index, edge id).

    A Philox stream keyed by ``seed`` with the sample index in the second
    counter word yields uniform number ``k`` for edge id ``k``.
    """
    edges = sorted(set(edges))
    if not edges:
        return {}
    gen = np.random.Generator(np.random.Philox(key=int(seed), counter=[0, int(index), 0, 0]))
    u = gen.random(max(edges) + 1)
    vals = np.asarray(model.distribution.ppf(u[edges]), dtype=float)
    return {e: float(v) for e, v in zip(edges, vals)}


# -- covering and summability -------------------------------------------------

@dataclass(frozen=True)
class Covering:
    sites: tuple[int, ...]
    kappa: float

    @property
    def holds(self) -> bool:
        return self.kappa > 0


def check_covering(model: AlloyModel, edge_set: Iterable[int]) -> Covering:
    """Collect every site whose support meets the edge set and take the
    essential infimum of their sum over the induced subgraph."""
    lam = set(edge_set)
    sites = tuple(s for s in sorted(model.sites) if lam & set(model.sites[s].support))
    kappa = math.inf
    for eid in sorted(lam):
        profs = [model.sites[s].pieces[eid] for s in sites if eid in model.sites[s].pieces]
        cuts = sorted({b for p in profs for b in p.breaks} | {0.0})
        # every cut starts a piece of positive length, so evaluating there is exact
        total = np.zeros(len(cuts))
        for p in profs:
            total += p(np.asarray(cuts))
        kappa = min(kappa, float(total.min()))
    return Covering(sites, kappa)


@dataclass(frozen=True)
class Summability:
    C1: float
    C2: float
    C3: float

    @property
    def proof_constant(self) -> float:
        return self.C1 + self.C2 / math.pi + 5.0 * self.C3


def summability_constants(model: AlloyModel, edge_set: Iterable[int],
                          covering: Covering | None = None) -> Summability:
    lam = set(edge_set)
    if covering is None:
        covering = check_covering(model, lam)
    g = model.graph
    c1 = c2 = c3 = 0.0
    for s in covering.sites:
        u = model.sites[s]
        lam_e = [e for e in u.support if e in lam]
        sub = restrict(g, lam_e)
        c1 += sum(g.degree(v) for v in sorted(sub.boundary))
        c2 += math.sqrt(u.sup_norm) * sub.volume()
        c3 += len(lam_e)
    n = len(lam)
    return Summability(c1 / n, c2 / n, c3 / n)


# -- evaluation ---------------------------------------------------------------

def potential_on_mesh(model: AlloyModel, omega: Mapping[int, float], sub, mesh) -> dict[int, np.ndarray]:
    """Node values of ``sum_e omega_e u_e`` on every edge of ``sub``.

    Returns edge id -> array of values at that edge's mesh nodes (both
    endpoints included, ordered from iota to tau). Sites are summed in
    sorted id order.
    """
    out = {}
    for eid in sub.edge_ids:
        x = mesh.coords.get(eid)
        if x is None:
            raise AlloyError(f"mesh has no nodes on edge {eid}")
        vals = np.zeros_like(x)
        for s in model.sites_on_edge(eid):
            w = omega.get(s)
            if w is None:
                raise AlloyError(f"no coupling for site {s} acting on edge {eid}")
            vals = vals + w * model.sites[s].pieces[eid](x)
        out[eid] = vals
    return out
