import networkx as nx
from hypothesis import given

from radiogather.coloring import (
    check_sibling_properties,
    is_two_hop_coloring,
    sibling_assignment,
    two_hop_coloring,
)
from radiogather.netgraph import Graph, bfs_tree, gen_lower_bound

from strategies import graphs, instances


def test_two_hop_examples():
    assert two_hop_coloring(Graph(1, frozenset())).color == (0,)
    path = two_hop_coloring(Graph.from_edges(3, [(0, 1), (1, 2)]))
    assert path.color == (0, 1, 2)
    star = two_hop_coloring(Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)]))
    assert sorted(star.color) == [0, 1, 2, 3] and star.palette_size <= 10


def test_g22_coloring_fixture():
    assert two_hop_coloring(gen_lower_bound(2, 2).graph).color == (0, 1, 2, 3)


@given(graphs(n_max=40))
def test_two_hop_against_square_graph(g):
    c = two_hop_coloring(g)
    h = nx.Graph(list(g.edges))
    h.add_nodes_from(range(g.n))
    sq = nx.power(h, 2)
    assert all(c[u] != c[v] for u, v in sq.edges)
    assert is_two_hop_coloring(g, c)
    assert c.palette_size <= g.max_degree**2 + 1
    assert two_hop_coloring(g) == c


def test_is_two_hop_detects_conflict():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert not is_two_hop_coloring(g, type(two_hop_coloring(g))((0, 1, 0), 2))


def test_sibling_examples():
    path = Graph.from_edges(5, [(i, i + 1) for i in range(4)])
    s = sibling_assignment(path, bfs_tree(path, 0))
    assert set(s.value.values()) == {0} and s.range_size == 1
    # a middle root has two children, which must differ
    s = sibling_assignment(path, bfs_tree(path, 2))
    assert s.value == {1: 0, 3: 1, 0: 0, 4: 0} and s.range_size == 2
    star = Graph.from_edges(5, [(0, j) for j in range(1, 5)])
    s = sibling_assignment(star, bfs_tree(star, 0))
    assert s.value == {1: 0, 2: 1, 3: 2, 4: 3} and s.range_size == 4
    g22 = gen_lower_bound(2, 2).graph
    assert sibling_assignment(g22, bfs_tree(g22, 0)).value == {1: 0, 2: 0, 3: 1}


@given(instances(n_max=50))
def test_sibling_properties_hold(inst):
    t = bfs_tree(inst.graph, inst.sink)
    s = sibling_assignment(inst.graph, t)
    assert check_sibling_properties(inst.graph, t, s) == []
    assert s.range_size == max(s.value.values(), default=0) + 1


@given(instances(n_max=50, trees=True))
def test_sibling_range_on_trees(inst):
    t = bfs_tree(inst.graph, inst.sink)
    s = sibling_assignment(inst.graph, t)
    assert s.range_size <= max(1, inst.graph.max_degree)
    assert s.range_size == max(1, max(len(c) for c in t.children.values()))


def test_sibling_check_reports_violation():
    star = Graph.from_edges(3, [(0, 1), (0, 2)])
    t = bfs_tree(star, 0)
    bad = type(sibling_assignment(star, t))({1: 0, 2: 0}, 1)
    assert check_sibling_properties(star, t, bad)
