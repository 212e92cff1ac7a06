import math

import numpy as np
import pytest

from qgwegner import assembly as asm
from qgwegner import conditions as vc
from qgwegner import graph as gr
from qgwegner.spectral import eigenvalues_dense


def _disc(g, field, h, edges=None):
    sub = gr.restrict(g, edges or g.edge_ids)
    return asm.Discretization(sub, field, h)


def test_single_edge_dirichlet_matrices():
    g = gr.path(1, 1.0)
    d = _disc(g, vc.uniform_field(g, "dirichlet"), 0.25)
    assert d.n_dofs == 3
    K = d.pencil().dense()
    ref = 4.0 * np.array([[2, -1, 0], [-1, 2, -1], [0, -1, 2]])
    assert np.array_equal(K, ref)
    assert np.allclose(d.m, 0.25)


def test_subdivision_rounding_and_minimum():
    g = gr.path(1, math.pi)
    d = _disc(g, vc.uniform_field(g, "dirichlet"), math.pi / 64)
    assert d.mesh.n_sub[0] == 64
    g = gr.path(1, 0.01)
    d = _disc(g, vc.uniform_field(g, "neumann"), 1.0)
    assert d.mesh.n_sub[0] == 2


def test_cuthill_mckee_keeps_path_tridiagonal():
    g = gr.path(6)
    d = _disc(g, vc.uniform_field(g, "kirchhoff"), 0.1)
    assert d.mesh.bandwidth == 1
    K = d.pencil().dense()
    assert np.count_nonzero(np.triu(K, 2)) == 0


def test_mass_sums_to_volume_for_free_ends():
    g = gr.grid(2, 1, 0.7)
    d = _disc(g, vc.uniform_field(g, "kirchhoff"), 0.05)
    assert d.m.sum() == pytest.approx(g.volume())


def test_constant_potential_shifts_spectrum():
    g = gr.star(3)
    d = _disc(g, vc.leaf_dirichlet_field(g), 1 / 16)
    ev0 = eigenvalues_dense(d.pencil())
    ev = eigenvalues_dense(d.pencil(asm.constant_values(d.mesh, 2.5)))
    assert np.allclose(ev, ev0 + 2.5, atol=1e-9)


def test_delta_adds_alpha_at_vertex_dof():
    g = gr.star(3)
    k = _disc(g, vc.uniform_field(g, "kirchhoff"), 0.1).pencil()
    dl = _disc(g, vc.uniform_field(g, "kirchhoff", overrides={0: vc.delta(3, 1.75)}), 0.1).pencil()
    diff = (dl.K - k.K).toarray()
    assert np.count_nonzero(diff) == 1
    assert diff.max() == pytest.approx(1.75)
    i = int(np.argmax(diff.diagonal()))
    assert dl.labels[i] == ("vertex", 0)


def test_neumann_vertex_decouples_edges():
    g = gr.path(2)
    d = _disc(g, vc.uniform_field(g, "neumann"), 0.1)
    ev = eigenvalues_dense(d.pencil())
    assert np.sum(np.abs(ev) < 1e-9) == 2


def test_potential_lumping_weights():
    g = gr.path(1, 1.0)
    d = _disc(g, vc.uniform_field(g, "neumann"), 0.25)
    vals = {0: np.array([1.0, 2.0, 3.0, 4.0, 5.0])}
    diag = d.lumped_potential(vals)
    order = [d.mesh.node_dof[0][j] for j in range(5)]
    assert np.allclose(diag[order], [0.125, 0.5, 0.75, 1.0, 0.625])
    with pytest.raises(asm.AssemblyError):
        d.lumped_potential({0: np.ones(3)})
    with pytest.raises(asm.AssemblyError):
        d.lumped_potential({0: np.array([1, 2, np.nan, 4, 5.0])})


def test_general_condition_cannot_be_discretized():
    g = gr.path(2)
    field = vc.uniform_field(g, "kirchhoff")
    conds = dict(field.conditions)
    conds[1] = vc.general(np.eye(2), np.zeros((2, 2)))
    with pytest.raises(asm.AssemblyError):
        _disc(g, vc.ConditionField(conds), 0.1)


def test_band_layout_and_dump(tmp_path):
    g = gr.grid(1, 1)
    p = _disc(g, vc.uniform_field(g, "kirchhoff"), 0.25).pencil()
    W = p.band()
    A = p.dense()
    for i in range(p.n):
        for dd in range(p.bandwidth + 1):
            if i + dd < p.n:
                assert W[i, dd] == A[i + dd, i]
    assert np.abs(np.tril(A, -p.bandwidth - 1)).max(initial=0) == 0
    f = tmp_path / "k.txt"
    asm.dump_triplets(p, f)
    lines = f.read_text().splitlines()
    assert lines[0].startswith("# K n=")
    assert sum(1 for l in lines if not l.startswith("#")) == p.K.nnz + p.n


def test_site_matrix_matches_direct_assembly():
    from qgwegner import alloy
    g = gr.path(4)
    sites = alloy.overlap_sites(g)
    model = alloy.AlloyModel(g, sites, alloy.Uniform(0, 1))
    d = _disc(g, vc.uniform_field(g, "kirchhoff"), 0.1)
    omega = {s: 0.1 * (s + 1) for s in sites}
    S = d.site_matrix(model, sorted(sites))
    direct = d.lumped_potential(alloy.potential_on_mesh(model, omega, d.sub, d.mesh))
    assert np.allclose(S @ np.array([omega[s] for s in sorted(sites)]), direct)
