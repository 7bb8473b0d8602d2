"""Children-parents assignments and schedules.

A children-parents assignment is a set of children X, a disjoint set of
parents Y and a surjective map par: X -> Y along graph edges.  A schedule is a
list of rounds (sets of transmitting children); it serves the assignment when
every child is, in some round, the only transmitting neighbour of its parent.

``reduce_assignment`` builds, for any assignment, a schedule in which every
child transmits exactly once together with a reduced parent set Y* such that
``|Y*| + |S| <= |X| + 1``.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import AbstractSet, Iterable, Mapping

from .coloring import TwoHopColoring
from .netgraph import Graph


class InvalidAssignmentError(ValueError):
    pass


@dataclass(frozen=True)
class CPAssignment:
    children: frozenset[int]
    parents: frozenset[int]
    par: Mapping[int, int]

    @classmethod
    def from_par(cls, par: Mapping[int, int]) -> CPAssignment:
        return cls(frozenset(par), frozenset(par.values()), dict(par))

    def validate(self, g: Graph) -> None:
        if self.children & self.parents:
            raise InvalidAssignmentError(f"children and parents overlap: {sorted(self.children & self.parents)}")
        if set(self.par) != set(self.children):
            raise InvalidAssignmentError("par must be defined exactly on the children")
        if set(self.par.values()) != set(self.parents):
            raise InvalidAssignmentError("par must be surjective onto the parents")
        for x, y in self.par.items():
            if not g.has_edge(x, y):
                raise InvalidAssignmentError(f"({x}, {y}) is not an edge")


@dataclass(frozen=True)
class Schedule:
    rounds: tuple[frozenset[int], ...] = ()

    def __len__(self) -> int:
        return len(self.rounds)

    def transmit_round(self) -> dict[int, int]:
        """1-based round of each transmitter (last one if it appears twice)."""
        return {x: i + 1 for i, r in enumerate(self.rounds) for x in r}


@dataclass(frozen=True)
class CPSResult:
    reduced: CPAssignment
    schedule: Schedule
    # protected parents kept although every one of their children could be rerouted
    forced_keeps: frozenset[int] = field(default=frozenset())


def reduce_assignment(
    g: Graph,
    a: CPAssignment,
    protected: AbstractSet[int] = frozenset(),
    compact: bool = True,
) -> CPSResult:
    """Inductive schedule construction for a children-parents assignment.

    Peel off a parent y (largest number of still-unscheduled neighbouring
    children, ties by smallest index), recurse on the children not adjacent to
    y, then on the way back either

    * Case 1: let one child of y with no edge into the recursive Y* join the
      first round and give every other child of y a solo round; y stays; or
    * Case 2: reroute each child of y to its smallest-index neighbour in the
      recursive Y* with a solo round each; y is dropped.

    Parents in ``protected`` are never dropped: when Case 2 would apply, their
    children keep them and transmit in solo rounds instead.  This costs one
    round over the usual bound per such parent.  ``compact`` merges each round
    into the previous one whenever all deliveries of both survive.
    """
    a.validate(g)
    adj = g.neighbor_sets
    remaining = set(a.children)
    active = set(a.parents)
    par_children: dict[int, set[int]] = {y: set() for y in a.parents}
    for x, y in a.par.items():
        par_children[y].add(x)
    deg = {y: sum(1 for x in adj[y] if x in remaining) for y in active}
    heap = [(-d, y) for y, d in deg.items()]
    heapq.heapify(heap)

    steps: list[tuple[int, list[int]]] = []
    while remaining:
        while True:
            d, y = heapq.heappop(heap)
            if y in active and -d == deg[y]:
                break
        kids = sorted(x for x in adj[y] if x in remaining)
        steps.append((y, kids))
        active.discard(y)
        for x in kids:
            remaining.discard(x)
            for w in adj[x]:
                if w in active:
                    deg[w] -= 1
                    heapq.heappush(heap, (-deg[w], w))
            py = a.par[x]
            par_children[py].discard(x)
            if not par_children[py]:
                active.discard(py)

    rounds: list[set[int]] = []
    ystar: set[int] = set()
    parstar: dict[int, int] = {}
    forced: set[int] = set()
    for y, kids in reversed(steps):
        free = [x for x in kids if ystar.isdisjoint(adj[x])]
        if free:
            first = free[0]
            if not rounds:
                rounds.append(set())
            rounds[0].add(first)
            parstar[first] = y
            for x in kids:
                if x != first:
                    rounds.append({x})
                    parstar[x] = y
            ystar.add(y)
        elif y in protected:
            for x in kids:
                rounds.append({x})
                parstar[x] = y
            ystar.add(y)
            forced.add(y)
        else:
            for x in kids:
                parstar[x] = min(w for w in adj[x] if w in ystar)
                rounds.append({x})

    if compact:
        rounds = _merge_adjacent(g, rounds, parstar)
    reduced = CPAssignment(a.children, frozenset(ystar), parstar)
    return CPSResult(reduced, Schedule(tuple(frozenset(r) for r in rounds)), frozenset(forced))


def _hits(g: Graph, transmitters: Iterable[int]) -> dict[int, int]:
    cnt: dict[int, int] = {}
    for x in transmitters:
        for w in g.adjacency[x]:
            cnt[w] = cnt.get(w, 0) + 1
    return cnt


def _merge_adjacent(g: Graph, rounds: list[set[int]], par: Mapping[int, int]) -> list[set[int]]:
    out: list[set[int]] = []
    out_hits: list[dict[int, int]] = []
    for r in rounds:
        h = _hits(g, r)
        if out:
            merged = dict(out_hits[-1])
            for w, c in h.items():
                merged[w] = merged.get(w, 0) + c
            if all(merged.get(par[x], 0) == 1 for x in (*out[-1], *r)):
                out[-1] = out[-1] | r
                out_hits[-1] = merged
                continue
        out.append(set(r))
        out_hits.append(h)
    return out


def simulate_cps(g: Graph, a: CPAssignment, s: Schedule) -> dict[int, list[int]]:
    """Rounds (1-based) in which each child's packet reached its parent alone."""
    delivered: dict[int, list[int]] = {x: [] for x in a.children}
    for i, transmitters in enumerate(s.rounds, start=1):
        hits = _hits(g, transmitters)
        for x in transmitters:
            y = a.par.get(x)
            if y is not None and y not in transmitters and hits.get(y, 0) == 1:
                delivered[x].append(i)
    return delivered


def is_cps(g: Graph, a: CPAssignment, s: Schedule) -> bool:
    return all(simulate_cps(g, a, s).values())


def cap_schedule(g: Graph, r: CPSResult, c: TwoHopColoring) -> CPSResult:
    """Replace schedules longer than Δ²+1 by the colour round-robin.

    In the replacement child x transmits in round c(x)+1; same-coloured nodes are
    at distance >= 3, so every listener hears at most one transmitter per round.
    """
    delta = g.max_degree
    if len(r.schedule) <= delta * delta + 1:
        return r
    missing = [x for x in r.reduced.children if not 0 <= x < len(c.color)]
    if missing:
        raise InvalidAssignmentError(f"colouring does not cover children {missing}")
    length = max(c[x] for x in r.reduced.children) + 1
    rounds: list[set[int]] = [set() for _ in range(length)]
    for x in r.reduced.children:
        rounds[c[x]].add(x)
    return CPSResult(r.reduced, Schedule(tuple(frozenset(x) for x in rounds)), r.forced_keeps)
