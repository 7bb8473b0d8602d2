"""Experiments, brute-force oracles and the invariant verification suite."""

from __future__ import annotations

import csv
import io
import math
import os
import random
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

import networkx as nx

from . import cps
from .coloring import (
    TwoHopColoring,
    check_sibling_properties,
    is_two_hop_coloring,
    sibling_assignment,
    two_hop_coloring,
)
from .gather_oracle import check_plan, check_triggers, choose_triggers
from .labels import GatherLargeK, label_bits, label_fields
from .netgraph import (
    GatherInstance,
    Graph,
    bfs_tree,
    gen_lower_bound,
    gen_random,
    load_graph,
    metrics,
)
from .radio_sim import check_transcript, completion_round
from .runtime import ALGORITHMS, execute


class ConfigError(ValueError):
    pass


class GuardError(ValueError):
    """Brute force asked for a state space beyond its guard."""


# --- brute force ----------------------------------------------------------

MAX_BRUTE_NODES = 10
MAX_BRUTE_HORIZON = 12


@lru_cache(maxsize=4096)
def _delivery_table(g: Graph) -> tuple[tuple[tuple[int, int], ...], ...]:
    """For every transmitter bitmask, the (receiver, sender) pairs it produces."""
    n = g.node_count
    nbr = [sum(1 << w for w in g.adjacency[v]) for v in range(n)]
    table = []
    for mask in range(1 << n):
        pairs = []
        for w in range(n):
            if mask >> w & 1:
                continue
            hit = nbr[w] & mask
            if hit and hit & (hit - 1) == 0:
                pairs.append((w, hit.bit_length() - 1))
        table.append(tuple(pairs))
    return tuple(table)


def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def bruteforce_optimal_gather(
    inst: GatherInstance, horizon: int, tied: Sequence[Iterable[int]] = ()
) -> Optional[int]:
    """Fewest rounds until the sink knows every message, or None within ``horizon``.

    Breadth-first over the vectors of known-id sets.  Only nodes that hold some
    message are awake and may transmit; the sink never needs to.  Each group in
    ``tied`` is forced to act as one (all transmit or all listen), which models
    nodes that cannot be told apart.
    """
    g = inst.graph
    n = g.node_count
    if n > MAX_BRUTE_NODES or horizon > MAX_BRUTE_HORIZON:
        raise GuardError(f"brute force limited to n <= {MAX_BRUTE_NODES}, horizon <= {MAX_BRUTE_HORIZON}")
    if horizon < 0:
        raise GuardError("horizon must be non-negative")
    ids = inst.message_ids()
    full = (1 << len(ids)) - 1
    start = tuple(1 << (ids[v] - 1) if v in ids else 0 for v in range(n))
    if start[inst.sink] == full:
        return 0
    groups = [sum(1 << v for v in grp) for grp in tied]
    table = _delivery_table(g)
    sink_bit = 1 << inst.sink
    seen = {start}
    frontier = [start]
    for depth in range(1, horizon + 1):
        nxt = []
        for st in frontier:
            active = sum(1 << v for v in range(n) if st[v]) & ~sink_bit
            for sub in _submasks(active):
                if any(sub & gm not in (0, gm) for gm in groups):
                    continue
                pairs = table[sub]
                if not pairs:
                    continue
                new = list(st)
                for w, v in pairs:
                    new[w] |= st[v]
                if new[inst.sink] == full:
                    return depth
                key = tuple(new)
                if key not in seen:
                    seen.add(key)
                    nxt.append(key)
        frontier = nxt
        if not frontier:
            break
    return None


def label_necessity_check(D: int = 3, p: int = 2, horizon: int = 8) -> dict:
    """Pendants of G_{D,p} forced to behave identically never finish gathering.

    Also reports the unconstrained optimum for contrast.
    """
    inst = gen_lower_bound(D, p)
    pendants = list(range(D, D + p))
    tied = bruteforce_optimal_gather(inst, horizon, tied=[pendants])
    free = bruteforce_optimal_gather(inst, horizon)
    return {
        "instance": f"G_{D},{p}",
        "horizon": horizon,
        "tied_result": tied,
        "free_result": free,
        "passed": tied is None and free is not None,
    }


def connected_graphs_upto(n_max: int) -> list[Graph]:
    """All connected graphs with at most ``n_max`` (<= 7) nodes, one per isomorphism class."""
    if n_max > 7:
        raise ValueError("the graph atlas covers n <= 7 only")
    out = []
    for h in nx.graph_atlas_g():
        if 1 <= h.number_of_nodes() <= n_max and nx.is_connected(h):
            out.append(Graph.from_edges(h.number_of_nodes(), h.edges()))
    return out


def small_instances(n_max: int = 6, k_max: int = 3) -> Iterator[GatherInstance]:
    """Every (graph, sink, source set) with 1 <= k <= k_max on connected graphs up to n_max."""
    from itertools import combinations

    for g in connected_graphs_upto(n_max):
        for sink in range(g.node_count):
            for k in range(1, min(k_max, g.node_count) + 1):
                for srcs in combinations(range(g.node_count), k):
                    yield GatherInstance(g, srcs, sink)


# --- instance families ----------------------------------------------------


def random_instances(count: int, seed: int = 0, n_max: int = 200, k_max: int = 50, trees_only: bool = False):
    """Mixed family: even positions are trees, odd ones carry extra edges."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        n = rng.randint(2, n_max)
        k = rng.randint(1, min(k_max, n - 1))
        capacity = n * (n - 1) // 2 - (n - 1)
        extra = 0 if trees_only or i % 2 == 0 else rng.randint(0, min(capacity, n))
        out.append(gen_random(n, extra, k, rng.randrange(2**31)))
    return out


def lower_bound_grid(D_values=range(2, 11), k_values=range(1, 9)) -> list[tuple[str, GatherInstance]]:
    return [(f"lb-D{D}-k{k}", gen_lower_bound(D, k)) for D in D_values for k in k_values]


# --- experiments ----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str
    generator: str = "random"  # random | lower-bound | file
    params: dict = field(default_factory=dict)
    seeds: Sequence[int] = (0,)
    round_limit: Optional[int] = None
    mode: Optional[str] = None
    out: Optional[str] = None

    def validate(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.generator not in ("random", "lower-bound", "file"):
            raise ConfigError(f"unknown generator {self.generator!r}")
        if not list(self.seeds):
            raise ConfigError("seed range is empty")
        if self.mode not in (None, "small", "large"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.round_limit is not None and self.round_limit < 1:
            raise ConfigError("round limit must be >= 1")

    def instances(self) -> list[tuple[str, GatherInstance]]:
        p = self.params
        if self.generator == "lower-bound":
            return lower_bound_grid(p.get("D", range(2, 11)), p.get("k", range(1, 9)))
        if self.generator == "file":
            if "path" not in p:
                raise ConfigError("file generator needs params['path']")
            with open(p["path"]) as fh:
                return [(os.path.basename(p["path"]), load_graph(fh.read()))]
        n, extra, k = p.get("n", 50), p.get("extra_edges", 0), p.get("k", 10)
        try:
            return [(f"rand-n{n}-e{extra}-k{k}-s{s}", gen_random(n, extra, k, s)) for s in self.seeds]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ResultRow:
    instance_id: str
    n: int
    D: int
    delta: int
    k: int
    algorithm: str
    completion_round: Optional[int]
    bound: int
    max_label_bits: int
    bound_satisfied: bool


RESULT_COLUMNS = tuple(ResultRow.__dataclass_fields__)


def threads_from_env() -> int:
    raw = os.environ.get("RADIOGATHER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def max_label_bits(labels) -> int:
    best = 0
    for lab in labels.values():
        if isinstance(lab, tuple):
            best = max(best, sum(label_bits(x) for x in lab))
        else:
            best = max(best, label_bits(lab))
    return best


def run_instance(instance_id: str, inst: GatherInstance, algorithm: str, round_limit=None, mode=None) -> ResultRow:
    setup, t = execute(inst, algorithm, round_limit, mode)
    m = metrics(inst.graph)
    done = completion_round(t, setup.goal)
    return ResultRow(
        instance_id=instance_id,
        n=m.n,
        D=m.diameter,
        delta=m.max_degree,
        k=inst.k,
        algorithm=algorithm,
        completion_round=done,
        bound=setup.bound,
        max_label_bits=max_label_bits(setup.labels),
        bound_satisfied=done is not None and done <= setup.bound,
    )


def _run_job(job):
    return run_instance(*job)


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None) -> list[ResultRow]:
    """Run every instance of the config; rows keep instance order whatever the parallelism."""
    cfg.validate()
    items = cfg.instances()
    if cfg.round_limit is not None and ALGORITHMS[cfg.algorithm].goal == "gather":
        for iid, inst in items:
            if cfg.round_limit < metrics(inst.graph).diameter + inst.k:
                warnings.warn(f"{iid}: round limit {cfg.round_limit} is below D+k", stacklevel=2)
                break
    jobs = [(iid, inst, cfg.algorithm, cfg.round_limit, cfg.mode) for iid, inst in items]
    threads = threads if threads is not None else threads_from_env()
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        rows = [_run_job(j) for j in jobs]
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(results_csv(rows))
    return rows


def results_csv(rows: Sequence[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        d = asdict(r)
        d["completion_round"] = "" if r.completion_round is None else r.completion_round
        w.writerow(d)
    return buf.getvalue()


def read_results_csv(text: str) -> list[ResultRow]:
    out = []
    for d in csv.DictReader(io.StringIO(text)):
        out.append(
            ResultRow(
                instance_id=d["instance_id"],
                n=int(d["n"]),
                D=int(d["D"]),
                delta=int(d["delta"]),
                k=int(d["k"]),
                algorithm=d["algorithm"],
                completion_round=int(d["completion_round"]) if d["completion_round"] else None,
                bound=int(d["bound"]),
                max_label_bits=int(d["max_label_bits"]),
                bound_satisfied=d["bound_satisfied"] == "True",
            )
        )
    return out


def coloring_csv(c: TwoHopColoring) -> str:
    return "node,color\n" + "".join(f"{v},{col}\n" for v, col in enumerate(c.color))


def schedule_csv(rounds: Sequence[Iterable[int]]) -> str:
    lines = ["round,transmitter"]
    for i, r in enumerate(rounds, start=1):
        lines += [f"{i},{x}" for x in sorted(r)]
    return "\n".join(lines) + "\n"


# --- label size fit -------------------------------------------------------


def label_size_x(k: int, delta: int) -> int:
    return math.ceil(math.log2(min(k, delta) + 2))


@dataclass(frozen=True)
class BitFit:
    a: float
    b: float
    points: int
    worst: tuple[int, int] = (0, 0)  # (x, bits) of the point that fixes b

    @property
    def within_limits(self) -> bool:
        return self.a <= 8 and self.b <= 24


def fit_label_bits(points: Sequence[tuple[int, int]], a_max: float = 8.0, step: float = 0.25) -> BitFit:
    """Upper envelope bits <= a*x + b with the least total slack, slope a on a grid in [0, a_max].

    For each slope the (integer) intercept is forced by the worst point.
    """
    if not points:
        return BitFit(0.0, 0.0, 0)
    best, best_slack = None, None
    for i in range(int(round(a_max / step)) + 1):
        a = i * step
        b, worst = max((y - a * x, (x, y)) for x, y in points)
        b = math.ceil(b - 1e-9)
        slack = sum(a * x + b - y for x, y in points)
        if best_slack is None or slack < best_slack - 1e-9:
            best, best_slack = BitFit(a, b, len(points), worst), slack
    return best


# --- verification suite ---------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    counterexample: Optional[str] = None


@dataclass
class Report:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, failures: list[str], detail: str = "") -> None:
        self.checks.append(
            CheckResult(name, not failures, detail, failures[0] if failures else None)
        )

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            line = f"{'PASS' if c.passed else 'FAIL'}  {c.name}"
            if c.detail:
                line += f"  ({c.detail})"
            out.append(line)
            if c.counterexample:
                out.append(f"      counterexample: {c.counterexample}")
        return out

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def random_assignment(rng: random.Random, n_max: int = 30) -> tuple[Graph, cps.CPAssignment]:
    n = rng.randint(2, n_max)
    extra = rng.randint(0, min(n * (n - 1) // 2 - (n - 1), 2 * n))
    g = gen_random(n, extra, 0, rng.randrange(2**31)).graph
    nodes = list(range(n))
    rng.shuffle(nodes)
    cut = rng.randint(1, n - 1)
    parents_pool = set(nodes[:cut])
    par = {}
    for x in nodes[cut:]:
        opts = [y for y in g.adjacency[x] if y in parents_pool]
        if opts and rng.random() < 0.9:
            par[x] = rng.choice(opts)
    return g, cps.CPAssignment.from_par(par)


def reduction_failures(g: Graph, a: cps.CPAssignment) -> list[str]:
    res = cps.reduce_assignment(g, a)
    out = []
    if len(res.reduced.parents) + len(res.schedule) > len(a.children) + 1:
        out.append(f"|Y*|+|S| = {len(res.reduced.parents) + len(res.schedule)} > |X|+1 = {len(a.children) + 1}")
    if not res.reduced.parents <= a.parents:
        out.append("Y* not a subset of Y")
    sched = [x for r in res.schedule.rounds for x in r]
    if sorted(sched) != sorted(a.children):
        out.append("some child not scheduled exactly once")
    try:
        res.reduced.validate(g)
    except cps.InvalidAssignmentError as exc:
        out.append(f"reduced assignment invalid: {exc}")
    if not cps.is_cps(g, res.reduced, res.schedule):
        out.append("schedule does not deliver every child to par*")
    if res.forced_keeps:
        out.append("unprotected reduction reported forced keeps")
    return [f"edges={sorted(g.edges)} par={dict(a.par)}: {m}" for m in out]


def forced_cap_fixture(length: int = 12) -> tuple[Graph, cps.CPSResult]:
    """Path with every second node a child and all-solo rounds, longer than Δ²+1 = 5."""
    n = 2 * length + 1
    g = Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    par = {2 * i + 1: 2 * i for i in range(length)}
    a = cps.CPAssignment.from_par(par)
    sched = cps.Schedule(tuple(frozenset({x}) for x in sorted(par)))
    return g, cps.CPSResult(a, sched)


def large_k_field_failures(inst: GatherInstance, labels) -> list[str]:
    g = inst.graph
    delta = g.max_degree
    s_max = sibling_assignment(g, bfs_tree(g, inst.sink)).range_size
    cap = max(delta * delta + 1, s_max)
    out = []
    for v, lab in labels.items():
        if isinstance(lab, GatherLargeK) and max(label_fields(lab)) > cap:
            out.append(f"node {v}: label {lab} exceeds {cap}")
    return out


def verify_suite(seed_count: int = 1, quick: bool = False) -> Report:
    """Run every invariant check on generated instances; failures carry a counterexample."""
    if seed_count < 1:
        raise ConfigError("seed_count must be >= 1")
    rep = Report()
    rng = random.Random(seed_count)
    inst_count = 20 if quick else 100 * seed_count
    family = random_instances(inst_count, seed=seed_count, n_max=60 if quick else 200)
    fixtures = [gen_lower_bound(2, 2), gen_lower_bound(5, 3), gen_random(2, 0, 1, 0)]
    everything = fixtures + family

    # netgraph
    fails = []
    for inst in everything:
        t = bfs_tree(inst.graph, inst.sink)
        h = nx.Graph(list(inst.graph.edges))
        h.add_nodes_from(range(inst.graph.node_count))
        ref = nx.single_source_shortest_path_length(h, inst.sink)
        if dict(t.level) != ref:
            fails.append(f"{inst.to_json()}: BFS levels differ from shortest paths")
        m = metrics(inst.graph, inst.sink)
        if not math.ceil(m.diameter / 2) <= m.bfs_height <= m.diameter:
            fails.append(f"{inst.to_json()}: BFS height outside [D/2, D]")
    rep.add("bfs levels equal shortest-path distances", fails, f"{len(everything)} instances")

    # coloring
    fails = []
    tree_fails = []
    for inst in everything:
        g = inst.graph
        c = two_hop_coloring(g)
        if not is_two_hop_coloring(g, c) or c.palette_size > g.max_degree**2 + 1:
            fails.append(f"{inst.to_json()}: bad 2-hop colouring")
        t = bfs_tree(g, inst.sink)
        s = sibling_assignment(g, t)
        bad = check_sibling_properties(g, t, s)
        if bad:
            fails.append(f"{inst.to_json()}: sibling pair {bad[0]}")
        if len(g.edges) == g.node_count - 1 and s.range_size > max(1, g.max_degree):
            tree_fails.append(f"{inst.to_json()}: S_max {s.range_size} > Δ on a tree")
    rep.add("2-hop colouring and sibling properties", fails)
    rep.add("sibling range <= Δ on trees", tree_fails)

    # cps
    fails = []
    trials = 200 if quick else 1000 * seed_count
    for _ in range(trials):
        g, a = random_assignment(rng)
        fails += reduction_failures(g, a)
    rep.add("children-parents reduction bound |Y*|+|S| <= |X|+1", fails, f"{trials} assignments")

    g, r = forced_cap_fixture()
    c = two_hop_coloring(g)
    capped = cps.cap_schedule(g, r, c)
    fails = []
    if len(capped.schedule) > g.max_degree**2 + 1:
        fails.append(f"capped length {len(capped.schedule)}")
    if not cps.is_cps(g, capped.reduced, capped.schedule):
        fails.append("capped schedule lost a delivery")
    rep.add("schedule cap keeps deliveries", fails, f"{len(r.schedule)} -> {len(capped.schedule)} rounds")

    # plans, labels, runtime
    plan_fails, trig_fails, eq_fails, bound_fails, rule_fails, field_fails, cap_fails = ([] for _ in range(7))
    points = []
    for inst in everything:
        m = metrics(inst.graph)
        setup, t = execute(inst, "gather-dplusk")
        plan = setup.plan
        plan_fails += [f"{inst.to_json()}: {p}" for p in check_plan(plan)]
        trig_fails += [f"{inst.to_json()}: {p}" for p in check_triggers(plan, setup.labels)]
        if t.transmitters_by_round() != plan.global_schedule:
            eq_fails.append(f"{inst.to_json()}: transcript differs from plan")
        done = completion_round(t)
        if done is None or done > m.diameter + inst.k:
            bound_fails.append(f"{inst.to_json()}: completion {done} > D+k")
        rule_fails += [f"{inst.to_json()}: {p}" for p in check_transcript(inst.graph, t)]
        if setup.mode == "large":
            field_fails += large_k_field_failures(inst, setup.labels)
            for ph in plan.phases:
                if ph.length > inst.graph.max_degree**2 + 1:
                    cap_fails.append(f"{inst.to_json()}: phase length {ph.length}")
        points.append((label_size_x(inst.k, inst.graph.max_degree), max_label_bits(setup.labels)))
    rep.add("plan structure and k+D-1 length", plan_fails)
    rep.add("trigger soundness", trig_fails)
    rep.add("distributed run equals centralised plan", eq_fails)
    rep.add("gather-dplusk within D+k", bound_fails)
    rep.add("reception rule holds in transcripts", rule_fails)
    rep.add("large-k phase schedules <= Δ²+1", cap_fails)
    rep.add("large-k label fields <= max(Δ²+1, S_max)", field_fails)
    fit = fit_label_bits(points)
    rep.add(
        "label bits fit a*ceil(log2(min(k,Δ)+2)) + b",
        [] if fit.within_limits else [f"fit a={fit.a}, b={fit.b} at point {fit.worst}"],
        f"a={fit.a:g}, b={fit.b:g}, {fit.points} instances",
    )

    fails = []
    for inst in everything[: 40 if quick else None]:
        setup, t = execute(inst, "gather-ddelta")
        done = completion_round(t)
        if t.status != "quiescent" or done is None or done > setup.bound:
            fails.append(f"{inst.to_json()}: ddelta completion {done} vs {setup.bound} ({t.error})")
    rep.add("gather-ddelta within 3*S_max*(D'+1)", fails)

    fails = []
    for inst in everything[: 40 if quick else None]:
        for algo in ("kbroadcast-unit", "kbroadcast-multi", "broadcast-ref"):
            setup, t = execute(inst, algo)
            done = completion_round(t)
            if done is None or done > setup.bound:
                fails.append(f"{inst.to_json()}: {algo} completion {done} vs {setup.bound}")
            if algo == "kbroadcast-multi" and any(k != setup.goal_ids for k in t.final_knowledge):
                fails.append(f"{inst.to_json()}: some node misses messages")
    rep.add("broadcast reductions within their bounds", fails)

    fails = []
    brute_rng = random.Random(seed_count + 7)
    for _ in range(10 if quick else 40 * seed_count):
        n = brute_rng.randint(2, 8)
        k = brute_rng.randint(1, min(3, n - 1))
        extra = brute_rng.randint(0, min(n * (n - 1) // 2 - (n - 1), 4))
        inst = gen_random(n, extra, k, brute_rng.randrange(2**31))
        D = metrics(inst.graph).diameter
        _, t = execute(inst, "gather-dplusk")
        got = completion_round(t)
        best = bruteforce_optimal_gather(inst, min(D + inst.k, MAX_BRUTE_HORIZON))
        if best is None or got is None or not best <= got <= D + inst.k:
            fails.append(f"{inst.to_json()}: optimum {best}, runtime {got}, D+k {D + inst.k}")
    rep.add("brute-force optimum <= gather-dplusk <= D+k (n <= 8)", fails)

    nec = label_necessity_check()
    rep.add(
        "identical pendants of G_{3,2} never finish within 8 rounds",
        [] if nec["passed"] else [str(nec)],
        f"tied: {nec['tied_result']}, distinguishable optimum: {nec['free_result']}",
    )
    return rep


def trigger_kinds(plan, mode: str) -> dict[str, int]:
    """How many transmitters use each trigger kind (for diagnostics)."""
    out: dict[str, int] = {}
    for trig in choose_triggers(plan, mode, plan.coloring).values():
        out[trig.kind] = out.get(trig.kind, 0) + 1
    return out
