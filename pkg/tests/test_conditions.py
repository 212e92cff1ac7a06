import numpy as np
import pytest
from hypothesis import given, strategies as st

from qgwegner import conditions as vc
from qgwegner import graph as gr


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_standard_families_validate(d):
    for cond in (vc.dirichlet(d), vc.neumann(d), vc.kirchhoff(d), vc.delta(d, 2.5), vc.delta(d, -1.0)):
        rep = vc.validate(cond)
        assert rep.ok, (cond, rep.failures())
        assert cond.degree == d


def test_kirchhoff_subspace_membership():
    k = vc.kirchhoff(3)
    # continuous values, derivatives summing to zero
    assert vc.in_subspace(k, [2, 2, 2], [1, -3, 2])
    assert not vc.in_subspace(k, [2, 2, 1], [1, -3, 2])
    assert not vc.in_subspace(k, [2, 2, 2], [1, 1, 1])
    d = vc.delta(3, 0.5)
    assert vc.in_subspace(d, [2, 2, 2], [1, 0, 0])   # sum s' = alpha s
    assert vc.same_subspace(vc.delta(4, 0.0), vc.kirchhoff(4))
    assert not vc.same_subspace(vc.dirichlet(2), vc.neumann(2))


def test_degree_one_kirchhoff_is_neumann():
    assert vc.same_subspace(vc.kirchhoff(1), vc.neumann(1))


def test_invalid_general_conditions():
    z = np.zeros((2, 2))
    rep = vc.validate(vc.general(z, z))
    assert not rep.rank_ok and rep.rank == 0
    rep = vc.validate(vc.general(np.eye(2), np.array([[0, 1], [0, 0]])))
    assert not rep.hermitian_ok
    assert any("Hermitian" in f for f in rep.failures())


@given(st.integers(1, 5), st.integers(0, 10_000))
def test_random_unitary_parametrization_is_valid(d, seed):
    # A = (U - I)/2, B = (U + I)/2i gives a self-adjoint condition for unitary U
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    U, _ = np.linalg.qr(Z)
    A = 0.5 * (U - np.eye(d))
    B = (U + np.eye(d)) / 2j
    assert vc.validate(vc.general(A, B)).ok


@given(st.integers(1, 5), st.integers(0, 10_000))
def test_left_multiplication_keeps_subspace(d, seed):
    rng = np.random.default_rng(seed)
    C = rng.normal(size=(d, d)) + np.eye(d) * 3
    k = vc.kirchhoff(d)
    k2 = vc.general(C @ k.A, C @ k.B)
    assert vc.validate(k2).ok
    assert vc.same_subspace(k, k2)


def test_induced_field_puts_dirichlet_on_boundary():
    g = gr.path(6)
    field = vc.uniform_field(g, "kirchhoff")
    sub = gr.restrict(g, [2, 3])
    ind = vc.induce_on_subgraph(field, sub)
    assert ind[2].tag == "dirichlet" and ind[4].tag == "dirichlet"
    assert ind[3].tag == "kirchhoff"


def test_leaf_dirichlet_field():
    f = vc.leaf_dirichlet_field(gr.star(3))
    assert f[0].tag == "kirchhoff" and f[0].degree == 3
    assert all(f[k].tag == "dirichlet" for k in (1, 2, 3))


def test_condition_from_dict():
    c = vc.condition_from_dict({"type": "delta", "alpha": 1.5}, 3)
    assert c.tag == "delta" and c.alpha == 1.5
    c = vc.condition_from_dict({"type": "general", "A": [[1, 0], [0, 1]], "B": [["0", [0, 1]], [[0, -1], 0]]}, 2)
    assert c.B[0, 1] == 1j
    with pytest.raises(vc.ConditionError):
        vc.condition_from_dict({"type": "kirchhoff", "alpha": 1.0}, 2)
    with pytest.raises(vc.ConditionError):
        vc.condition_from_dict({"type": "robin"}, 2)
    with pytest.raises(vc.ConditionError):
        vc.condition_from_dict({"type": "general", "A": [[1]], "B": [[0]]}, 2)
