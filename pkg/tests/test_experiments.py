import math

import numpy as np
import pytest

from qgwegner import alloy, spectral
from qgwegner import conditions as vc
from qgwegner import experiments as ex
from qgwegner import graph as gr
from qgwegner.assembly import Discretization


def _setup(n=4, dist=None):
    g = gr.path(n)
    model = alloy.AlloyModel(g, alloy.indicator_sites(g), dist or alloy.Uniform(0, 1))
    return g, model, vc.uniform_field(g, "kirchhoff")


def test_wegner_means_match_direct_counts():
    g, model, field = _setup()
    lams, eps = np.array([2.0, 9.5, 12.0]), [0.1, 0.4]
    rep = ex.run_wegner(model, field, [g.edge_ids], lams, eps, samples=3, seed=11, h=0.125)
    ws = rep.sets[0]
    sub = gr.restrict(g, g.edge_ids)
    disc = Discretization(sub, vc.induce_on_subgraph(field, sub), 0.125)
    tot = np.zeros((3, 2))
    for i in range(3):
        om = alloy.sample_omega(model, g.edge_ids, 11, i)
        p = disc.pencil(alloy.potential_on_mesh(model, om, sub, disc.mesh))
        for a, lam in enumerate(lams):
            for b, e in enumerate(eps):
                tot[a, b] += spectral.count_interval(p, lam, e, oracle_dense=True)
    assert np.allclose(ws.mean, tot / 3)
    assert np.allclose(ws.s_mu_4eps, [0.8, 1.0])
    assert np.allclose(ws.bound, ws.s_mu_4eps * 4)


def test_single_sample_stderr_is_nan():
    g, model, field = _setup()
    rep = ex.run_wegner(model, field, [g.edge_ids], [5.0], [0.1], samples=1, seed=0, h=0.25)
    assert np.isnan(rep.sets[0].stderr).all()


def test_thread_count_does_not_change_results():
    g, model, field = _setup(6)
    kw = dict(lambdas=np.linspace(0, 20, 11), epsilons=[0.05, 0.2], samples=12, seed=3, h=0.1)
    a = ex.run_wegner(model, field, [g.edge_ids], threads=1, **kw).sets[0]
    b = ex.run_wegner(model, field, [g.edge_ids], threads=3, **kw).sets[0]
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.stderr, b.stderr, equal_nan=True)


def test_oracle_check_and_dense_mode_agree():
    g, model, field = _setup()
    kw = dict(lambdas=np.linspace(0, 30, 16), epsilons=[0.1], samples=4, seed=9, h=0.1)
    a = ex.run_wegner(model, field, [g.edge_ids], oracle_check=4, **kw).sets[0]
    assert a.oracle_checked == 4 and a.oracle_mismatches == 0
    b = ex.run_wegner(model, field, [g.edge_ids], oracle_dense=True, **kw).sets[0]
    assert np.array_equal(a.mean, b.mean)


def test_covering_failure_aborts():
    g = gr.path(2)
    sites = {0: alloy.SingleSitePotential(0, {0: alloy.Profile((0.0,), (1.0,))}),
             1: alloy.SingleSitePotential(1, {})}
    model = alloy.AlloyModel(g, sites, alloy.Uniform(0, 1))
    with pytest.raises(ex.CoveringFailure):
        ex.run_wegner(model, vc.uniform_field(g), [[0, 1]], [1.0], [0.1], 2, 0, 0.25)


def test_large_epsilon_warns():
    g, model, field = _setup(2)
    with pytest.warns(UserWarning):
        ex.run_wegner(model, field, [g.edge_ids], [1.0], [0.6], 1, 0, 0.25)


def test_budget_exceeded():
    g, model, field = _setup(2)
    with pytest.raises(ex.BudgetExceeded):
        ex.run_wegner(model, field, [g.edge_ids], [1.0], [0.1], 50, 0, 0.25, budget_seconds=1e-9)


def test_slope_of_linear_means():
    ws = ex.WegnerSet(1, 1.0, 10, 1.0, 0, 0, 1, 1, np.array([0.0]), np.array([0.1, 0.2, 0.4]),
                      np.array([[0.1, 0.2, 0.4]]), np.zeros((1, 3)), np.array([0.2, 0.4, 0.8]))
    assert ws.slope() == pytest.approx(1.0)
    assert ws.max_ratio.tolist() == pytest.approx([0.5, 0.5, 0.5])


def test_ids_curves_are_monotone_and_nested():
    g, model, field = _setup(8)
    lams = np.linspace(0, 40, 21)
    curves = ex.run_ids(model, field, [[0, 1], [0, 1, 2, 3], g.edge_ids], lams, 5, 1, 0.125,
                        increment_eps=[0.5])
    for c in curves:
        assert np.all(np.diff(c.values) >= 0)
        assert np.all(c.increments[0.5] >= 0)
    assert len(ex.self_convergence(curves)) == 2
    with pytest.raises(ValueError):
        ex.run_ids(model, field, [[0, 1], [2, 3]], lams, 1, 1, 0.25)


def test_ids_closed_count_includes_level():
    g = gr.path(1, math.pi)
    # all couplings sit at 0, so the spectrum is the free one
    model = alloy.AlloyModel(g, alloy.indicator_sites(g), alloy.TwoPoint(0.0, 1.0, 0.0))
    field = vc.uniform_field(g, "dirichlet")
    h = math.pi / 32
    lam1 = (4 / h ** 2) * math.sin(h / 2) ** 2
    c = ex.run_ids(model, field, [g.edge_ids], [lam1], 2, 0, h)[0]
    assert c.values[0] * math.pi == pytest.approx(1.0)


def test_graph_lemma_rejects_support_outside_region():
    g = gr.path(4)
    with pytest.raises(ValueError):
        ex.verify_lemma_graph(g, vc.uniform_field(g), [1], {0: 1.0}, {0: 2.0}, [1.0], 0.25)


def test_edge_lemma_bound_value():
    g = gr.path(1, math.pi)
    r = ex.verify_lemma_edge(g, vc.uniform_field(g, "dirichlet"), {0: 0.0}, {0: 4.0}, [0.0, 50.0], 0.1)
    assert r.bound[0] == pytest.approx(2.0 + 5.0)
    assert r.ok
