"""Centralised k-gathering plans and the label schemes derived from them.

``build_plan`` peels the source subtree of the sink-rooted BFS tree leaf
layer by leaf layer.  Every phase turns the current leaves (all of which hold
messages) into a children-parents assignment towards their tree parents,
reduces it with :func:`cps.reduce_assignment` and removes the leaves, together
with any node that is left as a message-free leaf.  The concatenated phase
schedules are then replayed under the exact collision rule, so the plan knows
every reception every node makes; triggers for the labels are read off that
replay.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Mapping, Optional

from . import cps
from .coloring import SiblingAssignment, TwoHopColoring, sibling_assignment, two_hop_coloring
from .labels import Broadcast, DDelta, GatherLargeK, GatherSmallK, Label
from .netgraph import GatherInstance, bfs_tree, metrics, source_subtree


class PlanConsistencyError(RuntimeError):
    pass


@dataclass(frozen=True)
class Phase:
    tree: frozenset[int]
    children: tuple[int, ...]
    new_sources: frozenset[int]
    tree_parents: frozenset[int]
    parents: frozenset[int]
    par: Mapping[int, int]
    schedule: cps.Schedule
    offset: int
    forced_keeps: frozenset[int] = frozenset()

    @property
    def length(self) -> int:
        return len(self.schedule)

    @property
    def end(self) -> int:
        """Cumulative time after this phase (the value its packets announce)."""
        return self.offset + len(self.schedule)


@dataclass(frozen=True)
class Reception:
    round: int
    sender: int
    ids: frozenset[int]


@dataclass(frozen=True)
class GatherPlan:
    instance: GatherInstance
    phases: tuple[Phase, ...]
    message_ids: Mapping[int, int]
    transmit_round: Mapping[int, int]
    transmit_phase: Mapping[int, int]
    receptions: Mapping[int, tuple[Reception, ...]]
    knowledge: Mapping[int, frozenset[int]]
    coloring: Optional[TwoHopColoring] = None
    _ends: tuple[int, ...] = field(default=(), repr=False, compare=False)

    @property
    def length(self) -> int:
        return self.phases[-1].end if self.phases else 0

    @property
    def global_schedule(self) -> list[frozenset[int]]:
        return [r for ph in self.phases for r in ph.schedule.rounds]

    def phase_of_round(self, r: int) -> int:
        return bisect.bisect_left(self._ends, r)

    def initial_ids(self) -> dict[int, frozenset[int]]:
        return {v: frozenset({i}) for v, i in self.message_ids.items()}


def build_plan(inst: GatherInstance, coloring: Optional[TwoHopColoring] = None) -> GatherPlan:
    """Phase decomposition of the gathering schedule.

    With ``coloring`` every phase schedule goes through :func:`cps.cap_schedule`.
    A parent that already holds messages and would become a leaf is protected
    from being dropped (see :func:`cps.reduce_assignment`), so every node that
    transmits in phase i >= 1 hears one of its children during phase i-1.
    """
    g = inst.graph
    sink = inst.sink
    ids = inst.message_ids()
    senders = [v for v in inst.sources if v != sink]
    phases: list[Phase] = []

    if senders:
        t0 = source_subtree(bfs_tree(g, sink), senders)
        alive = set(t0.nodes)
        kids = {v: set(c) for v, c in t0.children.items()}
        holders = set(senders)
        prev_parents: frozenset[int] = frozenset()
        offset = 0
        while len(alive) > 1:
            leaves = sorted(v for v in alive if v != sink and not kids[v])
            if any(v not in holders for v in leaves):
                raise PlanConsistencyError("message-free leaf survived pruning")
            par = {x: t0.parent[x] for x in leaves}
            tree_parents = frozenset(par.values())
            leafset = set(leaves)
            protected = {
                y for y in tree_parents if y != sink and y in holders and kids[y] <= leafset
            }
            res = cps.reduce_assignment(g, cps.CPAssignment.from_par(par), protected=protected)
            if coloring is not None:
                res = cps.cap_schedule(g, res, coloring)
            phases.append(
                Phase(
                    tree=frozenset(alive),
                    children=tuple(leaves),
                    new_sources=frozenset(leafset - prev_parents),
                    tree_parents=tree_parents,
                    parents=res.reduced.parents,
                    par=dict(res.reduced.par),
                    schedule=res.schedule,
                    offset=offset,
                    forced_keeps=res.forced_keeps,
                )
            )
            offset += len(res.schedule)
            prev_parents = res.reduced.parents
            for x in leaves:
                alive.discard(x)
                kids[t0.parent[x]].discard(x)
            holders -= leafset
            holders |= res.reduced.parents
            # prune message-free leaves, bottom-up
            stack = [p for p in tree_parents]
            while stack:
                v = stack.pop()
                if v in alive and v != sink and not kids[v] and v not in holders:
                    alive.discard(v)
                    p = t0.parent[v]
                    kids[p].discard(v)
                    stack.append(p)

    return _replay(inst, tuple(phases), ids, coloring)


def _replay(
    inst: GatherInstance,
    phases: tuple[Phase, ...],
    ids: Mapping[int, int],
    coloring: Optional[TwoHopColoring],
) -> GatherPlan:
    g = inst.graph
    know = {v: set() for v in range(g.node_count)}
    for v, i in ids.items():
        know[v].add(i)
    transmit_round: dict[int, int] = {}
    transmit_phase: dict[int, int] = {}
    receptions: dict[int, list[Reception]] = {v: [] for v in range(g.node_count)}
    r = 0
    for pi, ph in enumerate(phases):
        for transmitters in ph.schedule.rounds:
            r += 1
            hits: dict[int, int] = {}
            last: dict[int, int] = {}
            for x in transmitters:
                if x in transmit_round:
                    raise PlanConsistencyError(f"node {x} scheduled twice")
                transmit_round[x] = r
                transmit_phase[x] = pi
                for w in g.adjacency[x]:
                    hits[w] = hits.get(w, 0) + 1
                    last[w] = x
            packets = {x: frozenset(know[x]) for x in transmitters}
            for w, c in hits.items():
                if c == 1 and w not in transmitters:
                    pkt = packets[last[w]]
                    receptions[w].append(Reception(r, last[w], pkt))
                    know[w] |= pkt
            for x in transmitters:
                rec = receptions[ph.par[x]]
                if not rec or rec[-1].round != r or rec[-1].sender != x:
                    raise PlanConsistencyError(f"child {x} failed to reach {ph.par[x]} in round {r}")
    if set(know[inst.sink]) != set(ids.values()):
        raise PlanConsistencyError("sink did not collect every message")
    return GatherPlan(
        instance=inst,
        phases=phases,
        message_ids=dict(ids),
        transmit_round=transmit_round,
        transmit_phase=transmit_phase,
        receptions={v: tuple(rs) for v, rs in receptions.items()},
        knowledge={v: frozenset(k) for v, k in know.items()},
        coloring=coloring,
        _ends=tuple(ph.end for ph in phases),
    )


def check_plan(plan: GatherPlan) -> list[str]:
    """Structural checks of a plan; returns a list of problems (empty when sound)."""
    inst = plan.instance
    problems = []
    senders = [v for v in inst.sources if v != inst.sink]
    D = metrics(inst.graph).diameter
    if plan.length > len(senders) + D - 1 and senders:
        problems.append(f"length {plan.length} exceeds k+D-1 = {len(senders) + D - 1}")
    for i, ph in enumerate(plan.phases):
        if len(ph.parents) + ph.length > len(ph.children) + 1 + len(ph.forced_keeps):
            problems.append(f"phase {i}: |Y'|+|S| = {len(ph.parents) + ph.length} > |X|+1")
        if i == 0 and set(ph.children) != set(senders) & set(ph.children):
            problems.append("phase 0 children must be sources")
        if i > 0:
            allowed = plan.phases[i - 1].parents | ph.new_sources
            if not set(ph.children) <= allowed:
                problems.append(f"phase {i}: children outside Y'_(i-1) and Z_i")
    if plan.phases and plan.phases[-1].parents != frozenset({inst.sink}):
        problems.append("last phase must deliver to the sink only")
    if plan.knowledge[inst.sink] != frozenset(plan.message_ids.values()):
        problems.append("sink misses messages")
    scheduled = [x for ph in plan.phases for r in ph.schedule.rounds for x in r]
    if len(scheduled) != len(set(scheduled)):
        problems.append("some node transmits more than once")
    return problems


# --- triggers -------------------------------------------------------------


@dataclass(frozen=True)
class Trigger:
    """How a node learns its transmission time.

    ``round`` is the round of the triggering reception (0 for clock start),
    ``cum`` the cumulative phase time that reception carries, ``value`` the id
    or colour to match, ``kind`` one of "phase" (heard during the previous
    phase), "earlier" (heard in an older phase) or "clock0".
    """

    round: int
    cum: int
    value: int
    kind: str


def _fresh_ids(plan: GatherPlan, v: int, limit: int) -> list[tuple[Reception, frozenset[int]]]:
    own = {plan.message_ids[v]} if v in plan.message_ids else set()
    seen: set[int] = set()
    out = []
    for rec in plan.receptions[v]:
        if rec.round > limit:
            break
        fresh = rec.ids - seen - own
        seen |= rec.ids
        if fresh:
            out.append((rec, frozenset(fresh)))
    return out


def _trigger(plan: GatherPlan, v: int, phase: int, mode: str, color: Optional[TwoHopColoring]) -> Trigger:
    """Trigger for a node acting in ``phase`` (``len(plan.phases)`` for the sink)."""
    if phase == 0:
        return _clock0(plan, v, mode, color)
    limit = plan.phases[phase - 1].end
    prev_start = plan.phases[phase - 1].offset
    if mode == "small":
        cands = [(rec, min(fresh)) for rec, fresh in _fresh_ids(plan, v, limit)]
    else:
        assert color is not None
        cands = [(rec, color[rec.sender]) for rec in plan.receptions[v] if rec.round <= limit]
    if not cands:
        return _clock0(plan, v, mode, color)
    rec, value = cands[-1]
    j = plan.phase_of_round(rec.round)
    kind = "phase" if rec.round > prev_start else "earlier"
    return Trigger(rec.round, plan.phases[j].end, value, kind)


def _clock0(plan: GatherPlan, v: int, mode: str, color: Optional[TwoHopColoring]) -> Trigger:
    if mode == "small":
        return Trigger(0, 0, plan.message_ids.get(v, 0), "clock0")
    assert color is not None
    return Trigger(0, 0, color[v], "clock0")


def choose_triggers(
    plan: GatherPlan, mode: str, coloring: Optional[TwoHopColoring] = None, include_sink: bool = False
) -> dict[int, Trigger]:
    out = {v: _trigger(plan, v, i, mode, coloring) for v, i in plan.transmit_phase.items()}
    if include_sink:
        out[plan.instance.sink] = _trigger(plan, plan.instance.sink, len(plan.phases), mode, coloring)
    return out


def _gather_labels(
    plan: GatherPlan, mode: str, coloring: Optional[TwoHopColoring], include_sink: bool
) -> dict[int, Optional[Label]]:
    triggers = choose_triggers(plan, mode, coloring, include_sink)
    labels: dict[int, Optional[Label]] = {v: None for v in range(plan.instance.graph.node_count)}
    for v, trig in triggers.items():
        if v in plan.transmit_phase:
            ph = plan.phases[plan.transmit_phase[v]]
            t = plan.transmit_round[v] - trig.cum
            T = ph.end - trig.cum
        else:  # the sink switches over right after the last phase
            t = T = plan.length - trig.cum
        if mode == "small":
            labels[v] = GatherSmallK(trig.value, t, T)
        else:
            assert coloring is not None
            labels[v] = GatherLargeK(trig.value, t, T, coloring[v])
    return labels


def labels_small_k(plan: GatherPlan, include_sink: bool = False) -> dict[int, Optional[Label]]:
    """Id-triggered labels; nodes that never transmit get ``None``."""
    return _gather_labels(plan, "small", None, include_sink)


def labels_large_k(
    plan: GatherPlan, c: Optional[TwoHopColoring] = None, include_sink: bool = False
) -> dict[int, Optional[Label]]:
    """Colour-triggered labels; ``plan`` must have been built with the same colouring."""
    c = c if c is not None else plan.coloring
    if c is None or plan.coloring is None or plan.coloring.color != c.color:
        raise ValueError("large-k labels need a plan capped with the same colouring")
    return _gather_labels(plan, "large", c, include_sink)


def choose_mode(inst: GatherInstance) -> str:
    return "small" if inst.k <= inst.graph.max_degree else "large"


def gather_labels(
    inst: GatherInstance, mode: Optional[str] = None, include_sink: bool = False
) -> tuple[GatherPlan, dict[int, Optional[Label]]]:
    """Plan plus labels for the D+k algorithm in the given (or automatic) mode."""
    mode = mode or choose_mode(inst)
    if mode == "small":
        plan = build_plan(inst)
        return plan, labels_small_k(plan, include_sink)
    if mode == "large":
        c = two_hop_coloring(inst.graph)
        plan = build_plan(inst, c)
        return plan, labels_large_k(plan, c, include_sink)
    raise ValueError(f"unknown mode {mode!r}")


def check_triggers(plan: GatherPlan, labels: Mapping[int, Optional[Label]]) -> list[str]:
    """Replay every labelled node's receptions with the node-side trigger rule.

    The trigger must fire exactly once, in the round chosen by the oracle, and
    the resulting transmission round must be the planned one.
    """
    coloring = plan.coloring
    problems = []
    for v, lab in labels.items():
        if not isinstance(lab, (GatherSmallK, GatherLargeK)) or v not in plan.transmit_round:
            continue
        own = {plan.message_ids[v]} if v in plan.message_ids else set()
        fired_at, cum = None, None
        if isinstance(lab, GatherSmallK) and (lab.trigger_id in own or lab.trigger_id == 0):
            fired_at, cum = 0, 0
        if isinstance(lab, GatherLargeK) and lab.trigger_color == lab.color:
            fired_at, cum = 0, 0
        if fired_at is None:
            for rec in plan.receptions[v]:
                if isinstance(lab, GatherSmallK):
                    hit = lab.trigger_id in rec.ids
                else:
                    hit = coloring is not None and coloring[rec.sender] == lab.trigger_color
                if hit:
                    fired_at = rec.round
                    cum = plan.phases[plan.phase_of_round(rec.round)].end
                    break
        if fired_at is None:
            problems.append(f"node {v}: trigger never fires")
            continue
        if cum + lab.t != plan.transmit_round[v]:
            problems.append(f"node {v}: fires at {fired_at}, would transmit at {cum + lab.t}")
        elif fired_at >= plan.transmit_round[v]:
            problems.append(f"node {v}: trigger after its own transmission")
    return problems


# --- DΔ and broadcast labels ---------------------------------------------


def labels_ddelta(
    inst: GatherInstance,
    c: Optional[TwoHopColoring] = None,
    s: Optional[SiblingAssignment] = None,
) -> dict[int, Optional[Label]]:
    """Labels for the O(DΔ) algorithm on the source subtree of the sink BFS tree."""
    g = inst.graph
    tree = bfs_tree(g, inst.sink)
    c = c if c is not None else two_hop_coloring(g)
    s = s if s is not None else sibling_assignment(g, tree)
    sub = source_subtree(tree, [inst.sink, *inst.sources])
    labels: dict[int, Optional[Label]] = {v: None for v in range(g.node_count)}
    for v in sub.nodes:
        p = sub.parent.get(v)
        labels[v] = DDelta(
            s=s.value.get(v, 0),
            color=c[v],
            parent_color=None if p is None else c[p],
            s_max=s.range_size,
            child_count=len(sub.children[v]),
            level_mod3=sub.level[v] % 3,
        )
    return labels


def labels_broadcast(
    g, informed_at_start, c: Optional[TwoHopColoring] = None
) -> dict[int, Optional[Label]]:
    """Frame-flooding labels: slot = 2-hop colour, frame length = palette size."""
    informed = set(informed_at_start)
    if not informed:
        raise ValueError("broadcast needs at least one informed node")
    c = c if c is not None else two_hop_coloring(g)
    return {v: Broadcast(c[v], c.palette_size, v in informed) for v in range(g.node_count)}
