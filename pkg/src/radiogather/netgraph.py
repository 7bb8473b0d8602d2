"""Graphs, BFS trees, instance generators and the JSON instance format.

Nodes are the integers ``0..n-1``.  The lower-bound family ``G_{D,p}`` maps
the usual ``v_1, ..., v_{D+p}`` naming onto indices ``0..D+p-1``, so ``v_1``
(the sink) is node 0 and the pendants are nodes ``D..D+p-1``.
"""

from __future__ import annotations

import heapq
import json
import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence


class InstanceError(ValueError):
    """Base class for rejected graphs and instances."""


class ParseError(InstanceError):
    pass


class IndexOutOfRangeError(InstanceError):
    pass


class NonSimpleGraphError(InstanceError):
    pass


class DisconnectedGraphError(InstanceError):
    pass


class DuplicateSourceError(InstanceError):
    pass


def _edge(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Graph:
    """Simple undirected connected graph on nodes ``0..node_count-1``."""

    node_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise InstanceError("graph needs at least one node")
        for u, v in self.edges:
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise IndexOutOfRangeError(f"edge ({u}, {v}) out of range for n={self.node_count}")
            if u >= v:
                raise NonSimpleGraphError(f"edge ({u}, {v}) is a self-loop or not normalised")
        if not _is_connected(self.node_count, self.adjacency):
            raise DisconnectedGraphError("graph is not connected")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> Graph:
        seen: set[tuple[int, int]] = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise IndexOutOfRangeError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise NonSimpleGraphError(f"self-loop at node {u}")
            key = _edge(u, v)
            if key in seen:
                raise NonSimpleGraphError(f"duplicate edge {key}")
            seen.add(key)
        return cls(n, frozenset(seen))

    @property
    def n(self) -> int:
        return self.node_count

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.adjacency[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[u]

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    def distances_from(self, source: int) -> list[int]:
        dist = [-1] * self.node_count
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self.adjacency[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist


def _is_connected(n: int, adj: Sequence[Sequence[int]]) -> bool:
    seen = [False] * n
    seen[0] = True
    stack = [0]
    count = 1
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(w)
    return count == n


@dataclass(frozen=True)
class GatherInstance:
    graph: Graph
    sources: tuple[int, ...]
    sink: int

    def __post_init__(self) -> None:
        n = self.graph.node_count
        if not 0 <= self.sink < n:
            raise IndexOutOfRangeError(f"sink {self.sink} out of range for n={n}")
        for s in self.sources:
            if not 0 <= s < n:
                raise IndexOutOfRangeError(f"source {s} out of range for n={n}")
        if len(set(self.sources)) != len(self.sources):
            raise DuplicateSourceError(f"duplicate source in {list(self.sources)}")

    @property
    def k(self) -> int:
        return len(self.sources)

    def message_ids(self) -> dict[int, int]:
        """Message id (1..k) per source, in ascending node order."""
        return {v: i + 1 for i, v in enumerate(sorted(self.sources))}

    def to_dict(self) -> dict:
        return {
            "n": self.graph.node_count,
            "edges": [list(e) for e in sorted(self.graph.edges)],
            "sources": list(self.sources),
            "sink": self.sink,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class Metrics:
    n: int
    max_degree: int
    diameter: int
    bfs_height: int


@dataclass(frozen=True)
class RootedTree:
    root: int
    parent: Mapping[int, int]
    level: Mapping[int, int]
    children: Mapping[int, tuple[int, ...]] = field(default=None, compare=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.children is None:
            kids: dict[int, list[int]] = {v: [] for v in self.level}
            for v, p in self.parent.items():
                kids[p].append(v)
            object.__setattr__(self, "children", {v: tuple(sorted(c)) for v, c in kids.items()})

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(self.level)

    @property
    def height(self) -> int:
        return max(self.level.values())

    def leaves(self) -> list[int]:
        return sorted(v for v, c in self.children.items() if not c and v != self.root)

    def path_to_root(self, v: int) -> list[int]:
        path = [v]
        while path[-1] != self.root:
            path.append(self.parent[path[-1]])
        return path


def parse_instance(obj: Mapping) -> GatherInstance:
    try:
        n = obj["n"]
        edges = obj["edges"]
        sources = obj["sources"]
        sink = obj["sink"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field: {exc}") from exc
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"'n' must be a positive integer, got {n!r}")
    try:
        edge_list = [(int(e[0]), int(e[1])) for e in edges if len(e) == 2]
        if len(edge_list) != len(edges):
            raise ParseError("every edge must be a pair")
        source_list = [int(s) for s in sources]
        sink = int(sink)
    except (TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed instance: {exc}") from exc
    for s in [*source_list, sink]:
        if not 0 <= s < n:
            raise IndexOutOfRangeError(f"node index {s} out of range for n={n}")
    if len(set(source_list)) != len(source_list):
        raise DuplicateSourceError(f"duplicate source in {source_list}")
    graph = Graph.from_edges(n, edge_list)
    return GatherInstance(graph, tuple(source_list), sink)


def load_graph(text: str) -> GatherInstance:
    """Parse and validate a JSON instance document."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    return parse_instance(obj)


def metrics(g: Graph, root: int = 0) -> Metrics:
    """Exact diameter (all-pairs BFS), max degree and BFS height from ``root``."""
    ecc = [max(g.distances_from(v)) for v in range(g.node_count)]
    return Metrics(
        n=g.node_count,
        max_degree=g.max_degree,
        diameter=max(ecc),
        bfs_height=ecc[root],
    )


def bfs_tree(g: Graph, root: int) -> RootedTree:
    """BFS tree; each node's parent is its smallest-index neighbour one level up."""
    if not 0 <= root < g.node_count:
        raise IndexOutOfRangeError(f"root {root} out of range")
    dist = g.distances_from(root)
    parent: dict[int, int] = {}
    for v in range(g.node_count):
        if v == root:
            continue
        parent[v] = min(w for w in g.adjacency[v] if dist[w] == dist[v] - 1)
    return RootedTree(root, parent, {v: d for v, d in enumerate(dist)})


def source_subtree(t: RootedTree, sources: Iterable[int]) -> RootedTree:
    """Smallest subtree of ``t`` containing the root and every source."""
    srcs = list(sources)
    if not srcs:
        raise ValueError("source list is empty")
    keep = {t.root}
    for s in srcs:
        v = s
        while v not in keep:
            keep.add(v)
            v = t.parent[v]
    return RootedTree(
        t.root,
        {v: t.parent[v] for v in keep if v != t.root},
        {v: t.level[v] for v in keep},
    )


def gen_lower_bound(D: int, p: int) -> GatherInstance:
    """``G_{D,p}``: a path of D nodes with p pendants on its far end; sink at the near end."""
    if D < 1 or p < 1:
        raise ValueError("D and p must be positive")
    edges = [(i, i + 1) for i in range(D - 1)]
    edges += [(D - 1, j) for j in range(D, D + p)]
    return GatherInstance(Graph.from_edges(D + p, edges), tuple(range(D, D + p)), 0)


def random_tree_edges(n: int, rng: random.Random) -> list[tuple[int, int]]:
    """Uniform random labelled tree on n nodes via a random Pruefer sequence."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    leaves = [v for v in range(n) if degree[v] == 1]
    heapq.heapify(leaves)
    edges = []
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append(_edge(leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u, v = heapq.heappop(leaves), heapq.heappop(leaves)
    edges.append(_edge(u, v))
    return edges


def gen_random(n: int, extra_edges: int, k: int, seed: int) -> GatherInstance:
    """Random spanning tree plus ``extra_edges`` non-tree edges; k sources, distinct sink."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0 <= k <= n - 1:
        raise ValueError("k must lie in [0, n-1]")
    capacity = n * (n - 1) // 2 - (n - 1)
    if extra_edges < 0 or extra_edges > capacity:
        raise ValueError(f"extra_edges={extra_edges} exceeds capacity {capacity} for n={n}")
    rng = random.Random(seed)
    edges = set(random_tree_edges(n, rng))
    while len(edges) < n - 1 + extra_edges:
        u, v = rng.randrange(n), rng.randrange(n)
        if u != v:
            edges.add(_edge(u, v))
    order = list(range(n))
    rng.shuffle(order)
    sink, sources = order[0], tuple(sorted(order[1 : k + 1]))
    return GatherInstance(Graph(n, frozenset(edges)), sources, sink)


def instance_from_graph(g: Graph, sources: Iterable[int], sink: int) -> GatherInstance:
    return GatherInstance(g, tuple(sources), sink)
