import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radiogather import cps
from radiogather.coloring import two_hop_coloring
from radiogather.harness import forced_cap_fixture, reduction_failures, random_assignment
from radiogather.netgraph import Graph

from strategies import CROSSED_PAR, crossed_graph


def deliveries_by_hand(g, par, rounds):
    """Independent reference: count transmitting neighbours of every parent."""
    out = {x: [] for x in par}
    for i, tx in enumerate(rounds, start=1):
        for x in tx:
            y = par[x]
            if y not in tx and sum(1 for w in tx if g.has_edge(w, y)) == 1:
                out[x].append(i)
    return out


def test_empty_assignment():
    g = Graph.from_edges(2, [(0, 1)])
    res = cps.reduce_assignment(g, cps.CPAssignment.from_par({}))
    assert len(res.schedule) == 0 and res.reduced.parents == frozenset()


def test_star_needs_solo_rounds():
    g = Graph.from_edges(5, [(0, j) for j in range(1, 5)])
    res = cps.reduce_assignment(g, cps.CPAssignment.from_par({j: 0 for j in range(1, 5)}))
    assert [sorted(r) for r in res.schedule.rounds] == [[1], [2], [3], [4]]
    assert res.reduced.parents == {0}


def test_crossed_fixture():
    g = crossed_graph()
    res = cps.reduce_assignment(g, cps.CPAssignment.from_par(CROSSED_PAR))
    assert res.schedule.rounds == (frozenset({4, 5}), frozenset({6, 7}))
    assert res.reduced.parents == {2, 3}
    assert res.reduced.par[6] == 2 and res.reduced.par[7] == 3
    assert cps.is_cps(g, res.reduced, res.schedule)


def test_crossed_without_merging():
    g = crossed_graph()
    res = cps.reduce_assignment(g, cps.CPAssignment.from_par(CROSSED_PAR), compact=False)
    assert res.schedule.rounds == (frozenset({4, 5}), frozenset({6}), frozenset({7}))


def test_protected_parent_is_kept():
    g = crossed_graph()
    res = cps.reduce_assignment(g, cps.CPAssignment.from_par(CROSSED_PAR), protected={1})
    assert 1 in res.reduced.parents and res.forced_keeps == {1}
    assert cps.is_cps(g, res.reduced, res.schedule)


def test_simulate_examples():
    g = Graph.from_edges(2, [(0, 1)])
    a = cps.CPAssignment.from_par({1: 0})
    assert cps.simulate_cps(g, a, cps.Schedule((frozenset({1}),))) == {1: [1]}
    star = Graph.from_edges(3, [(0, 1), (0, 2)])
    a = cps.CPAssignment.from_par({1: 0, 2: 0})
    assert cps.simulate_cps(star, a, cps.Schedule((frozenset({1, 2}),))) == {1: [], 2: []}


def test_crossed_relays_given_schedule_delivers():
    g = crossed_graph()
    a = cps.CPAssignment(frozenset(CROSSED_PAR), frozenset({2, 3}), {4: 2, 5: 3, 6: 2, 7: 3})
    s = cps.Schedule((frozenset({4, 5}), frozenset({6, 7})))
    assert all(cps.simulate_cps(g, a, s).values())


@pytest.mark.parametrize(
    "par",
    [{1: 1}, {1: 0, 0: 2}, {2: 0}],
)
def test_invalid_assignments(par):
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    with pytest.raises(cps.InvalidAssignmentError):
        cps.reduce_assignment(g, cps.CPAssignment.from_par(par))


def test_cap_unchanged_when_short():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    res = cps.reduce_assignment(g, cps.CPAssignment.from_par({0: 1}))
    assert cps.cap_schedule(g, res, two_hop_coloring(g)) is res
    star = Graph.from_edges(31, [(0, j) for j in range(1, 31)])
    res = cps.reduce_assignment(star, cps.CPAssignment.from_par({j: 0 for j in range(1, 31)}))
    assert len(cps.cap_schedule(star, res, two_hop_coloring(star)).schedule) == 30


def test_cap_replaces_long_schedule():
    g, res = forced_cap_fixture(12)
    assert len(res.schedule) == 12 > g.max_degree**2 + 1
    c = two_hop_coloring(g)
    capped = cps.cap_schedule(g, res, c)
    assert len(capped.schedule) <= g.max_degree**2 + 1
    assert capped.reduced == res.reduced
    assert all(deliveries_by_hand(g, capped.reduced.par, capped.schedule.rounds).values())


def test_cap_needs_covering_coloring():
    g, res = forced_cap_fixture(12)
    short = type(two_hop_coloring(g))((0, 1, 2), 3)
    with pytest.raises(cps.InvalidAssignmentError):
        cps.cap_schedule(g, res, short)


@settings(max_examples=200)
@given(st.integers(0, 2**32))
def test_reduction_properties(seed):
    g, a = random_assignment(random.Random(seed))
    assert reduction_failures(g, a) == []
    res = cps.reduce_assignment(g, a)
    assert all(deliveries_by_hand(g, res.reduced.par, res.schedule.rounds).values())
    assert cps.simulate_cps(g, res.reduced, res.schedule) == deliveries_by_hand(
        g, res.reduced.par, res.schedule.rounds
    )
    assert cps.reduce_assignment(g, a) == res


@given(st.integers(0, 2**32))
def test_cap_output_properties(seed):
    g, a = random_assignment(random.Random(seed), n_max=20)
    res = cps.reduce_assignment(g, a)
    capped = cps.cap_schedule(g, res, two_hop_coloring(g))
    assert len(capped.schedule) <= max(len(res.schedule), g.max_degree**2 + 1)
    assert cps.is_cps(g, capped.reduced, capped.schedule)
