import math

import pytest
from hypothesis import given, strategies as st

from qgwegner import graph as gr


def test_path_layout():
    g = gr.path(4, 0.5)
    assert g.vertices == (0, 1, 2, 3, 4)
    assert [(e.iota, e.tau) for e in g.edges] == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert g.degree(0) == 1 and g.degree(2) == 2
    assert g.volume() == pytest.approx(2.0)


def test_star_and_grid_degrees():
    s = gr.star(5)
    assert s.degree(0) == 5
    assert all(s.degree(k) == 1 for k in range(1, 6))
    g = gr.grid(2, 2)
    assert len(g.edges) == 12
    assert g.degree(4) == 4 and g.degree(0) == 2 and g.degree(1) == 3


def test_loop_counts_twice():
    g = gr.build_graph([0, 1], [(0, 0, 1, 1.0), (1, 0, 0, 2.0)])
    assert g.degree(0) == 3
    assert g.edge(1).is_loop


@pytest.mark.parametrize("edges", [
    [(0, 0, 1, 0.0)],          # zero length
    [(0, 0, 7, 1.0)],          # unknown endpoint
    [(0, 0, 1, 1.0), (0, 1, 0, 1.0)],  # duplicate id
    [(0, 0, 1, math.inf)],
])
def test_rejects_bad_edges(edges):
    with pytest.raises(gr.GraphError):
        gr.build_graph([0, 1], edges)


def test_dict_roundtrip_and_unknown_keys():
    g = gr.grid(1, 2, 0.7)
    assert gr.graph_from_dict(g.to_dict()) == g
    with pytest.raises(gr.GraphError):
        gr.graph_from_dict({"vertices": [0, 1], "edges": [], "colour": 1})
    with pytest.raises(gr.GraphError):
        gr.build_graph([0, 1], [{"id": 0, "iota": 0, "tau": 1, "length": 1.0, "weight": 2}])


def test_restrict_boundary_is_degree_drop():
    g = gr.path(8)
    sub = gr.restrict(g, [3, 4])
    assert sub.vertices == (3, 4, 5)
    assert sub.boundary == {3, 5}
    assert sub.interior == {4}
    # a leaf of the parent stays interior when its only edge is kept
    sub = gr.restrict(g, [0, 1])
    assert sub.boundary == {2}
    assert 0 in sub.interior


def test_restrict_grid_center():
    g = gr.grid(2, 2)
    sub = gr.restrict(g, g.incident_edges(4))
    assert sub.interior == {4}
    assert sub.boundary == {1, 3, 5, 7}


def test_restrict_rejects_unknown_and_empty():
    g = gr.path(3)
    with pytest.raises(gr.GraphError):
        gr.restrict(g, [5])
    with pytest.raises(gr.GraphError):
        gr.restrict(g, [])


@given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=20))
def test_volume_is_sum_of_lengths(lengths):
    g = gr.build_graph(range(len(lengths) + 1), [(i, i, i + 1, l) for i, l in enumerate(lengths)])
    assert gr.volume(g, g.edge_ids) == pytest.approx(math.fsum(lengths))
    assert gr.restrict(g, g.edge_ids).boundary == frozenset()


@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_boundary_definition_on_grids(nx, ny, data):
    g = gr.grid(nx, ny)
    ids = data.draw(st.sets(st.sampled_from(g.edge_ids), min_size=1))
    sub = gr.restrict(g, ids)
    for v in sub.vertices:
        assert (v in sub.boundary) == (sub.local_degree[v] < g.degree(v))
    assert sum(sub.local_degree.values()) == 2 * len(ids)
