"""Synchronous radio network engine.

Rules: in each round every awake node either transmits or listens; a listener
receives iff exactly one neighbour transmits (collisions are silent); a node
sleeps until its first reception unless it holds an initial message; every
packet carries the round number, so a node that wakes up knows the clock.

Node programs see their label, their initial ids and what they receive.  They
never see the graph.  A program announces the round of its next transmission
through ``pending``; rounds in which nobody transmits change nothing, so the
engine jumps straight to the next pending round.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

from .netgraph import GatherInstance, Graph


class ProgramError(RuntimeError):
    """A node program violated its own invariants or the engine contract."""


@dataclass(frozen=True)
class Packet:
    ids: frozenset[int]
    clock: int
    cum_time: Optional[int] = None
    sender_color: Optional[int] = None
    sender_parent_color: Optional[int] = None
    kind: str = "gather"
    base: Optional[int] = None

    def to_dict(self) -> dict:
        return {
            "ids": sorted(self.ids),
            "clock": self.clock,
            "cum_time": self.cum_time,
            "sender_color": self.sender_color,
            "sender_parent_color": self.sender_parent_color,
            "kind": self.kind,
            "base": self.base,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Packet:
        return cls(**{**d, "ids": frozenset(d["ids"])})


class NodeProgram:
    """Base class; the default program listens forever.

    Subclasses override :meth:`start`, :meth:`on_packet` and :meth:`make_packet`.
    """

    def __init__(self, label, initial_ids: Iterable[int] = ()):
        self.label = label
        self.known: set[int] = set(initial_ids)
        self.history: list[tuple[int, Packet]] = []
        self.pending: Optional[int] = None

    def start(self) -> None:
        """Called at round 0 for nodes awake from the start."""

    def on_packet(self, r: int, pkt: Packet) -> None:
        pass

    def make_packet(self, r: int) -> Packet:
        raise ProgramError(f"{type(self).__name__} has nothing to transmit")

    def receive(self, r: int, pkt: Packet) -> None:
        self.history.append((r, pkt))
        self.known |= pkt.ids
        self.on_packet(r, pkt)

    def transmit(self, r: int) -> Packet:
        pkt = self.make_packet(r)
        if self.pending == r:
            self.pending = None
        return pkt


ProgramFactory = Callable[[object, frozenset], NodeProgram]


@dataclass(frozen=True)
class RoundRecord:
    round: int
    transmitters: tuple[int, ...]
    packets: Mapping[int, Packet]
    deliveries: Mapping[int, int]  # receiver -> sender
    gained: Mapping[int, frozenset[int]]  # receiver -> ids it did not know before


@dataclass
class Transcript:
    n: int
    algorithm: str
    sink: int
    goal: str
    goal_ids: frozenset[int]
    initial: tuple[frozenset[int], ...]
    rounds: list[RoundRecord] = field(default_factory=list)
    last_round: int = 0
    status: str = "quiescent"  # quiescent | limit | error
    error: Optional[str] = None

    def record(self, r: int) -> Optional[RoundRecord]:
        for rec in self.rounds:
            if rec.round == r:
                return rec
        return None

    def transmitters_by_round(self, length: Optional[int] = None) -> list[frozenset[int]]:
        """Transmitter set of rounds 1..length (default: up to the last active round)."""
        length = self.last_round if length is None else length
        out = [frozenset()] * length
        for rec in self.rounds:
            if rec.round <= length:
                out[rec.round - 1] = frozenset(rec.transmitters)
        return out

    def knowledge_after(self, r: int) -> list[frozenset[int]]:
        know = [set(k) for k in self.initial]
        for rec in self.rounds:
            if rec.round > r:
                break
            for v, ids in rec.gained.items():
                know[v] |= ids
        return [frozenset(k) for k in know]

    @property
    def final_knowledge(self) -> list[frozenset[int]]:
        return self.knowledge_after(self.last_round)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "algorithm": self.algorithm,
            "sink": self.sink,
            "goal": self.goal,
            "goal_ids": sorted(self.goal_ids),
            "initial": [sorted(k) for k in self.initial],
            "last_round": self.last_round,
            "status": self.status,
            "error": self.error,
            "completion_round": completion_round(self, self.goal),
            "rounds": [
                {
                    "round": rec.round,
                    "transmitters": list(rec.transmitters),
                    "packets": {str(v): p.to_dict() for v, p in rec.packets.items()},
                    "deliveries": {str(w): v for w, v in rec.deliveries.items()},
                    "gained": {str(w): sorted(ids) for w, ids in rec.gained.items()},
                }
                for rec in self.rounds
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, d: Mapping) -> Transcript:
        rounds = [
            RoundRecord(
                round=rd["round"],
                transmitters=tuple(rd["transmitters"]),
                packets={int(v): Packet.from_dict(p) for v, p in rd["packets"].items()},
                deliveries={int(w): v for w, v in rd["deliveries"].items()},
                gained={int(w): frozenset(ids) for w, ids in rd["gained"].items()},
            )
            for rd in d["rounds"]
        ]
        return cls(
            n=d["n"],
            algorithm=d["algorithm"],
            sink=d["sink"],
            goal=d["goal"],
            goal_ids=frozenset(d["goal_ids"]),
            initial=tuple(frozenset(k) for k in d["initial"]),
            rounds=rounds,
            last_round=d["last_round"],
            status=d["status"],
            error=d.get("error"),
        )


GOALS = ("gather", "broadcast")


def _goal_holds(goal: str, know: Sequence[set[int]] | Sequence[frozenset[int]], sink: int, ids: frozenset[int]) -> bool:
    if goal == "gather":
        return ids <= know[sink]
    if goal == "broadcast":
        return all(ids <= k for k in know)
    raise ValueError(f"unknown goal {goal!r}; expected one of {GOALS}")


def completion_round(t: Transcript, goal: Optional[str] = None) -> Optional[int]:
    """First round after which the goal holds (0 if it holds initially), else None.

    ``gather``: the sink knows every goal id; ``broadcast``: every node does.
    """
    goal = t.goal if goal is None else goal
    know = [set(k) for k in t.initial]
    if _goal_holds(goal, know, t.sink, t.goal_ids):
        return 0
    for rec in t.rounds:
        for v, ids in rec.gained.items():
            know[v] |= ids
        if _goal_holds(goal, know, t.sink, t.goal_ids):
            return rec.round
    return None


def run(
    inst: GatherInstance,
    labels: Mapping[int, object],
    program: Union[str, ProgramFactory],
    round_limit: int,
    initial_ids: Optional[Mapping[int, Iterable[int]]] = None,
    goal: Optional[str] = None,
    goal_ids: Optional[Iterable[int]] = None,
) -> Transcript:
    """Execute one run until no transmission is pending or ``round_limit`` is reached.

    ``program`` is an algorithm id from :data:`runtime.ALGORITHMS` or a factory
    ``(label, initial_ids) -> NodeProgram``.  By default sources hold their
    message ids and the goal is gathering at the sink.
    """
    if round_limit < 1:
        raise ValueError("round_limit must be >= 1")
    name = program if isinstance(program, str) else getattr(program, "__name__", "custom")
    if isinstance(program, str):
        from .runtime import ALGORITHMS

        if program not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {program!r}")
        algo = ALGORITHMS[program]
        factory: ProgramFactory = algo.program
        goal = goal or algo.goal
    else:
        factory = program
    goal = goal or "gather"
    if goal not in GOALS:
        raise ValueError(f"unknown goal {goal!r}")
    g = inst.graph
    n = g.node_count
    if initial_ids is None:
        initial_ids = {v: {i} for v, i in inst.message_ids().items()}
    init = tuple(frozenset(initial_ids.get(v, ())) for v in range(n))
    if goal_ids is None:
        goal_ids = frozenset().union(*init)
    t = Transcript(n, name, inst.sink, goal, frozenset(goal_ids), init)

    know = [set(k) for k in init]
    awake = [bool(k) for k in init]
    try:
        progs = [factory(labels.get(v), init[v]) for v in range(n)]
        for v in range(n):
            if awake[v]:
                progs[v].start()
                _check_pending(progs[v], v, 0)
        r = 0
        while True:
            upcoming = [p.pending for v, p in enumerate(progs) if awake[v] and p.pending is not None]
            if not upcoming:
                break
            r = min(upcoming)
            if r > round_limit:
                t.status = "limit"
                break
            transmitters = tuple(v for v in range(n) if awake[v] and progs[v].pending == r)
            packets = {}
            for v in transmitters:
                pkt = progs[v].transmit(r)
                if pkt.clock != r:
                    raise ProgramError(f"node {v} stamped clock {pkt.clock} in round {r}")
                if not pkt.ids <= know[v]:
                    raise ProgramError(f"node {v} sent ids it does not know")
                packets[v] = pkt
            hits: dict[int, int] = {}
            last: dict[int, int] = {}
            for v in transmitters:
                for w in g.adjacency[v]:
                    hits[w] = hits.get(w, 0) + 1
                    last[w] = v
            deliveries = {w: last[w] for w, c in sorted(hits.items()) if c == 1 and w not in packets}
            gained = {}
            for w, v in deliveries.items():
                pkt = packets[v]
                new = pkt.ids - know[w]
                if new:
                    gained[w] = frozenset(new)
                know[w] |= pkt.ids
                awake[w] = True
                progs[w].receive(r, pkt)
            for v in set(transmitters) | set(deliveries):
                _check_pending(progs[v], v, r)
            t.rounds.append(RoundRecord(r, transmitters, packets, deliveries, gained))
            t.last_round = r
    except ProgramError as exc:
        t.status = "error"
        t.error = str(exc)
    return t


def _check_pending(p: NodeProgram, v: int, r: int) -> None:
    if p.pending is not None and p.pending <= r:
        raise ProgramError(f"node {v} scheduled a transmission for past round {p.pending} at round {r}")


def check_transcript(g: Graph, t: Transcript) -> list[str]:
    """Post-hoc audit: collision rule, wake-up order, knowledge bookkeeping."""
    problems = []
    know = [set(k) for k in t.initial]
    woke = [0 if k else None for k in t.initial]
    prev = 0
    for rec in t.rounds:
        if rec.round <= prev:
            problems.append(f"round {rec.round} out of order")
        prev = rec.round
        tx = set(rec.transmitters)
        for v in tx:
            if woke[v] is None or woke[v] >= rec.round:
                problems.append(f"round {rec.round}: node {v} transmits before waking")
            if not rec.packets[v].ids <= know[v]:
                problems.append(f"round {rec.round}: node {v} sends unknown ids")
        expect = {}
        for w in range(g.node_count):
            if w in tx:
                continue
            senders = [v for v in g.adjacency[w] if v in tx]
            if len(senders) == 1:
                expect[w] = senders[0]
        if dict(rec.deliveries) != expect:
            problems.append(f"round {rec.round}: deliveries differ from the collision rule")
        for w in tx & set(rec.deliveries):
            problems.append(f"round {rec.round}: transmitter {w} also received")
        for w, v in expect.items():
            new = rec.packets[v].ids - know[w]
            if new != set(rec.gained.get(w, ())):
                problems.append(f"round {rec.round}: node {w} knowledge delta mismatch")
            know[w] |= rec.packets[v].ids
            if woke[w] is None:
                woke[w] = rec.round
    return problems


# --- CSV ------------------------------------------------------------------

CSV_COLUMNS = ("round", "node", "action", "received_ids", "known_ids_count")


def transcript_csv(t: Transcript) -> str:
    """One row per node for round 0 (initial state) and every round with a transmission.

    action: T transmit, L listened and received, S silent (nothing received).
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    know = [set(k) for k in t.initial]
    for v in range(t.n):
        w.writerow((0, v, "S", "", len(know[v])))
    for rec in t.rounds:
        tx = set(rec.transmitters)
        for v, ids in rec.gained.items():
            know[v] |= ids
        for v in range(t.n):
            if v in tx:
                w.writerow((rec.round, v, "T", "", len(know[v])))
            elif v in rec.deliveries:
                ids = " ".join(map(str, sorted(rec.packets[rec.deliveries[v]].ids)))
                w.writerow((rec.round, v, "L", ids, len(know[v])))
            else:
                w.writerow((rec.round, v, "S", "", len(know[v])))
    return buf.getvalue()


@dataclass(frozen=True)
class CsvRow:
    round: int
    node: int
    action: str
    received_ids: frozenset[int]
    known_ids_count: int


def read_transcript_csv(text: str) -> list[CsvRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    return [
        CsvRow(
            int(row["round"]),
            int(row["node"]),
            row["action"],
            frozenset(int(x) for x in row["received_ids"].split()),
            int(row["known_ids_count"]),
        )
        for row in reader
    ]


def completion_from_csv(rows: Sequence[CsvRow], goal: str, goal_size: int, sink: int) -> Optional[int]:
    """Completion round recomputed from CSV rows alone (known-id counts)."""
    if goal not in GOALS:
        raise ValueError(f"unknown goal {goal!r}")
    by_round: dict[int, dict[int, int]] = {}
    for row in rows:
        by_round.setdefault(row.round, {})[row.node] = row.known_ids_count
    for r in sorted(by_round):
        counts = by_round[r]
        if goal == "gather" and counts.get(sink, 0) >= goal_size:
            return r
        if goal == "broadcast" and all(c >= goal_size for c in counts.values()):
            return r
    return None
