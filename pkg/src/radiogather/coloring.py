"""Distance-2 colouring and the BFS-level sibling assignment used by the DΔ algorithm."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .netgraph import Graph, RootedTree


@dataclass(frozen=True)
class TwoHopColoring:
    color: tuple[int, ...]
    palette_size: int

    def __getitem__(self, v: int) -> int:
        return self.color[v]


@dataclass(frozen=True)
class SiblingAssignment:
    value: Mapping[int, int]
    range_size: int


def _first_fit(taken: set[int]) -> int:
    c = 0
    while c in taken:
        c += 1
    return c


def two_hop_coloring(g: Graph) -> TwoHopColoring:
    """Greedy first-fit over the square graph, nodes in ascending order.

    Any two nodes within distance 2 get distinct colours.  The square graph has
    degree at most Δ², so at most Δ²+1 colours are used.
    """
    color = [-1] * g.node_count
    for v in range(g.node_count):
        taken = set()
        for w in g.adjacency[v]:
            taken.add(color[w])
            for x in g.adjacency[w]:
                taken.add(color[x])
        taken.discard(-1)
        color[v] = _first_fit(taken)
    return TwoHopColoring(tuple(color), max(color) + 1)


def is_two_hop_coloring(g: Graph, c: TwoHopColoring) -> bool:
    for v in range(g.node_count):
        for w in g.adjacency[v]:
            if c[v] == c[w]:
                return False
            for x in g.adjacency[w]:
                if x != v and c[v] == c[x]:
                    return False
    return True


def sibling_assignment(g: Graph, t: RootedTree) -> SiblingAssignment:
    """Assign s(v) to every non-root node of the BFS tree ``t``.

    Per level, first-fit in ascending node order over the conflict graph where
    u and w conflict iff they share a parent or one is adjacent to the other's
    parent.  This gives, for same-level u != w with s(u) == s(w): different
    parents, no edge u-p(w) and no edge w-p(u).
    """
    by_level: dict[int, list[int]] = {}
    for v, lvl in t.level.items():
        if v != t.root:
            by_level.setdefault(lvl, []).append(v)
    value: dict[int, int] = {}
    for lvl in sorted(by_level):
        for v in sorted(by_level[lvl]):
            pv = t.parent[v]
            taken = set()
            # same-level neighbours of p(v) (covers siblings, and w adjacent to p(v))
            for w in g.adjacency[pv]:
                if w in value and t.level[w] == lvl:
                    taken.add(value[w])
            # w whose parent is adjacent to v
            for x in g.adjacency[v]:
                if t.level[x] == lvl - 1:
                    for w in t.children[x]:
                        if w in value:
                            taken.add(value[w])
            value[v] = _first_fit(taken)
    return SiblingAssignment(value, max(value.values(), default=0) + 1)


def check_sibling_properties(g: Graph, t: RootedTree, s: SiblingAssignment) -> list[tuple[int, int, str]]:
    """Exhaustive per-level pair scan; returns violating pairs (empty when fine)."""
    bad = []
    by_level: dict[int, list[int]] = {}
    for v, lvl in t.level.items():
        if v != t.root:
            by_level.setdefault(lvl, []).append(v)
    for nodes in by_level.values():
        nodes.sort()
        for i, u in enumerate(nodes):
            for w in nodes[i + 1 :]:
                if s.value[u] != s.value[w]:
                    continue
                if t.parent[u] == t.parent[w]:
                    bad.append((u, w, "siblings share a value"))
                elif g.has_edge(u, t.parent[w]) or g.has_edge(w, t.parent[u]):
                    bad.append((u, w, "edge to the other's parent"))
    return bad
