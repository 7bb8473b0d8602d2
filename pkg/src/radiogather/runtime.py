"""Label-driven node programs and the algorithm registry.

Every program is built from a label and the node's initial ids only; all
timing is derived from the clock and the fields carried by received packets.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

from .coloring import sibling_assignment, two_hop_coloring
from .gather_oracle import GatherPlan, choose_mode, gather_labels, labels_broadcast, labels_ddelta
from .labels import DDelta, GatherLargeK, GatherSmallK
from .netgraph import GatherInstance, bfs_tree, metrics, source_subtree
from .radio_sim import NodeProgram, Packet, ProgramError


class GatherDPlusK(NodeProgram):
    """Transmit once, ``t`` rounds after the cumulative time carried by the trigger packet."""

    def __init__(self, label, initial_ids=()):
        super().__init__(label, initial_ids)
        self.initial = frozenset(initial_ids)
        self.fired = False
        self.out_cum: Optional[int] = None
        if label is not None and not isinstance(label, (GatherSmallK, GatherLargeK)):
            raise ProgramError(f"gather-dplusk cannot run with label {label!r}")

    def _self_triggered(self) -> bool:
        lab = self.label
        if isinstance(lab, GatherSmallK):
            return lab.trigger_id == 0 or lab.trigger_id in self.initial
        return lab.trigger_color == lab.color

    def _fire(self, cum: int) -> None:
        self.fired = True
        self.pending = cum + self.label.t
        self.out_cum = cum + self.label.T

    def start(self) -> None:
        if self.label is not None and self._self_triggered():
            self._fire(0)

    def on_packet(self, r: int, pkt: Packet) -> None:
        lab = self.label
        if lab is None or pkt.kind != "gather":
            return
        if not self.fired and len(self.history) == 1 and self._self_triggered():
            # woken by its first packet but scheduled from clock 0
            self._fire(0)
            return
        if self.fired or pkt.cum_time is None:
            return
        if isinstance(lab, GatherSmallK):
            hit = lab.trigger_id in pkt.ids
        else:
            hit = pkt.sender_color == lab.trigger_color
        if hit:
            self._fire(pkt.cum_time)

    def make_packet(self, r: int) -> Packet:
        color = self.label.color if isinstance(self.label, GatherLargeK) else None
        return Packet(frozenset(self.known), r, cum_time=self.out_cum, sender_color=color)


class BroadcastRef(NodeProgram):
    """Frame flooding: informed in frame f, transmit in slot ``slot`` of frame f+1."""

    def __init__(self, label, initial_ids=(), source: Optional[bool] = None):
        super().__init__(label, initial_ids)
        self.is_source = label.is_source if source is None and label is not None else bool(source)
        self.base: Optional[int] = None
        self.done = False

    def _schedule(self, base: int, informed_round: int) -> None:
        L = self.label.frame_len
        frame = -(-(informed_round - base) // L)
        self.base = base
        self.pending = base + frame * L + self.label.slot + 1

    def start(self) -> None:
        if self.label is not None and self.is_source:
            self._schedule(0, 0)

    def begin_at(self, base: int) -> None:
        self._schedule(base, base)

    def on_packet(self, r: int, pkt: Packet) -> None:
        if self.label is None or pkt.kind != "broadcast" or self.base is not None:
            return
        self._schedule(pkt.base, r)

    def make_packet(self, r: int) -> Packet:
        self.done = True
        return Packet(frozenset(self.known), r, kind="broadcast", base=self.base)


class GatherDDelta(NodeProgram):
    """3-round phases; in-phase slot = level mod 3; relay after the last child is heard."""

    def __init__(self, label, initial_ids=()):
        super().__init__(label, initial_ids)
        if label is not None and not isinstance(label, DDelta):
            raise ProgramError(f"gather-ddelta cannot run with label {label!r}")
        self.children_heard: set[int] = set()
        self.sent = False

    def _round_of(self, phase: int) -> int:
        return 3 * phase + self.label.level_mod3 + 1

    def start(self) -> None:
        lab = self.label
        if lab is not None and lab.parent_color is not None and lab.child_count == 0:
            self.pending = self._round_of(lab.s)

    def on_packet(self, r: int, pkt: Packet) -> None:
        lab = self.label
        if lab is None or pkt.sender_parent_color != lab.color or pkt.sender_color is None:
            return
        self.children_heard.add(pkt.sender_color)
        if len(self.children_heard) > lab.child_count:
            raise ProgramError(
                f"heard {len(self.children_heard)} distinct children, label says {lab.child_count}"
            )
        if len(self.children_heard) == lab.child_count and lab.parent_color is not None and not self.sent:
            t = (r - 1) // 3
            nxt = t + 1 + (lab.s - (t + 1)) % lab.s_max
            self.pending = self._round_of(nxt)

    def make_packet(self, r: int) -> Packet:
        self.sent = True
        return Packet(
            frozenset(self.known),
            r,
            sender_color=self.label.color,
            sender_parent_color=self.label.parent_color,
            kind="gather",
        )


class KBroadcastMulti(NodeProgram):
    """Gather to the sink, then broadcast everything from it.

    The label is a pair (gathering label, broadcast label).  The broadcast
    label's ``is_source`` marks the sink: when its own gathering trigger fires
    it does not transmit a gathering packet but starts the broadcast with the
    scheduled round as the frame base.
    """

    def __init__(self, label, initial_ids=()):
        super().__init__(label, initial_ids)
        g_label, b_label = label if label is not None else (None, None)
        self.gather = GatherDPlusK(g_label, initial_ids)
        self.bcast = BroadcastRef(b_label, initial_ids, source=False)
        self.is_sink = b_label is not None and b_label.is_source

    def _sync(self) -> None:
        if self.is_sink and self.gather.pending is not None:
            base = self.gather.pending
            self.gather.pending = None
            self.bcast.begin_at(base)
        opts = [p for p in (self.gather.pending, self.bcast.pending) if p is not None]
        self.pending = min(opts) if opts else None

    def start(self) -> None:
        self.gather.start()
        self._sync()

    def receive(self, r: int, pkt: Packet) -> None:
        self.history.append((r, pkt))
        self.known |= pkt.ids
        self.gather.receive(r, pkt)
        self.bcast.receive(r, pkt)
        self._sync()

    def transmit(self, r: int) -> Packet:
        sub = self.gather if self.gather.pending == r else self.bcast
        sub.known = set(self.known)
        pkt = sub.transmit(r)
        self._sync()
        return pkt


# --- registry -------------------------------------------------------------


@dataclass
class Setup:
    """Everything needed to run one algorithm on one instance."""

    labels: Mapping[int, object]
    initial_ids: Mapping[int, frozenset[int]]
    goal: str
    goal_ids: frozenset[int]
    bound: int
    mode: Optional[str] = None
    plan: Optional[GatherPlan] = None
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Algorithm:
    name: str
    program: Callable
    goal: str
    prepare: Callable[..., Setup]


def _message_ids(inst: GatherInstance) -> dict[int, frozenset[int]]:
    return {v: frozenset({i}) for v, i in inst.message_ids().items()}


def _prepare_dplusk(inst: GatherInstance, mode: Optional[str] = None) -> Setup:
    mode = mode or choose_mode(inst)
    plan, labels = gather_labels(inst, mode)
    D = metrics(inst.graph).diameter
    ids = _message_ids(inst)
    return Setup(labels, ids, "gather", frozenset().union(*ids.values()), D + inst.k, mode, plan)


def _prepare_ddelta(inst: GatherInstance, mode: Optional[str] = None) -> Setup:
    g = inst.graph
    tree = bfs_tree(g, inst.sink)
    c = two_hop_coloring(g)
    s = sibling_assignment(g, tree)
    labels = labels_ddelta(inst, c, s)
    d_src = max((tree.level[v] for v in inst.sources), default=0)
    ids = _message_ids(inst)
    sub = source_subtree(tree, [inst.sink, *inst.sources])
    return Setup(
        labels,
        ids,
        "gather",
        frozenset().union(*ids.values()),
        3 * s.range_size * (d_src + 1),
        info={"s_max": s.range_size, "source_depth": d_src, "tree_nodes": len(sub.nodes)},
    )


def _broadcast_bound(inst: GatherInstance, frame_len: int) -> int:
    return (metrics(inst.graph).diameter + 1) * frame_len


def _prepare_broadcast(inst: GatherInstance, mode: Optional[str] = None) -> Setup:
    c = two_hop_coloring(inst.graph)
    labels = labels_broadcast(inst.graph, [inst.sink], c)
    return Setup(
        labels,
        {inst.sink: frozenset({1})},
        "broadcast",
        frozenset({1}),
        _broadcast_bound(inst, c.palette_size),
        info={"frame_len": c.palette_size},
    )


def _prepare_kbroadcast_unit(inst: GatherInstance, mode: Optional[str] = None) -> Setup:
    if inst.k < 1:
        raise ValueError("k-broadcast needs at least one source")
    c = two_hop_coloring(inst.graph)
    labels = labels_broadcast(inst.graph, inst.sources, c)
    D = metrics(inst.graph).diameter
    delta = inst.graph.max_degree
    return Setup(
        labels,
        {v: frozenset({1}) for v in inst.sources},
        "broadcast",
        frozenset({1}),
        (D + 2) * (delta * delta + 1),
        info={"frame_len": c.palette_size},
    )


def _prepare_kbroadcast_multi(inst: GatherInstance, mode: Optional[str] = None) -> Setup:
    if inst.k < 1:
        raise ValueError("k-broadcast needs at least one source")
    mode = mode or choose_mode(inst)
    plan, g_labels = gather_labels(inst, mode, include_sink=True)
    c = plan.coloring or two_hop_coloring(inst.graph)
    b_labels = labels_broadcast(inst.graph, [inst.sink], c)
    labels = {v: (g_labels[v], b_labels[v]) for v in range(inst.graph.node_count)}
    D = metrics(inst.graph).diameter
    delta = inst.graph.max_degree
    ids = _message_ids(inst)
    return Setup(
        labels,
        ids,
        "broadcast",
        frozenset().union(*ids.values()),
        (D + inst.k) + (D + 2) * (delta * delta + 1),
        mode,
        plan,
        info={"frame_len": c.palette_size, "switch_round": plan.length},
    )


ALGORITHMS: dict[str, Algorithm] = {
    a.name: a
    for a in (
        Algorithm("gather-dplusk", GatherDPlusK, "gather", _prepare_dplusk),
        Algorithm("gather-ddelta", GatherDDelta, "gather", _prepare_ddelta),
        Algorithm("broadcast-ref", BroadcastRef, "broadcast", _prepare_broadcast),
        Algorithm("kbroadcast-unit", BroadcastRef, "broadcast", _prepare_kbroadcast_unit),
        Algorithm("kbroadcast-multi", KBroadcastMulti, "broadcast", _prepare_kbroadcast_multi),
    )
}


def prepare(inst: GatherInstance, algorithm: str, mode: Optional[str] = None) -> Setup:
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {sorted(ALGORITHMS)}")
    if mode not in (None, "small", "large"):
        raise ValueError(f"unknown mode {mode!r}")
    return ALGORITHMS[algorithm].prepare(inst, mode)


def execute(inst: GatherInstance, algorithm: str, round_limit: Optional[int] = None, mode: Optional[str] = None):
    """Prepare labels and run; returns (setup, transcript)."""
    from .radio_sim import run

    setup = prepare(inst, algorithm, mode)
    limit = round_limit if round_limit is not None else max(4 * setup.bound, 1)
    t = run(inst, setup.labels, algorithm, limit, setup.initial_ids, setup.goal, setup.goal_ids)
    return setup, t
