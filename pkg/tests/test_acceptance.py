"""One test per acceptance criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` to see the summary block.
"""

import random
import time

import pytest

from radiogather import cps
from radiogather.coloring import sibling_assignment, two_hop_coloring
from radiogather.harness import (
    bruteforce_optimal_gather,
    fit_label_bits,
    forced_cap_fixture,
    label_necessity_check,
    label_size_x,
    large_k_field_failures,
    lower_bound_grid,
    max_label_bits,
    random_assignment,
    random_instances,
    small_instances,
    verify_suite,
)
from radiogather.netgraph import bfs_tree, gen_random, metrics
from radiogather.radio_sim import completion_round
from radiogather.runtime import execute


@pytest.fixture(scope="module")
def grid():
    return [inst for _, inst in lower_bound_grid(range(2, 11), range(1, 9))]


@pytest.fixture(scope="module")
def random500():
    return random_instances(500, seed=2024, n_max=200, k_max=50)


def test_criterion_1_d_plus_k(acceptance_line, grid, random500):
    start = time.perf_counter()
    exact_fail, bound_fail = [], []
    for inst in grid:
        D = metrics(inst.graph).diameter
        _, t = execute(inst, "gather-dplusk")
        done = completion_round(t)
        if done != inst.k + D - 1 or t.final_knowledge[inst.sink] != set(range(1, inst.k + 1)):
            exact_fail.append((D, inst.k, done))
    trees = 0
    for inst in random500:
        trees += len(inst.graph.edges) == inst.graph.node_count - 1
        _, t = execute(inst, "gather-dplusk")
        done = completion_round(t)
        if done is None or done > metrics(inst.graph).diameter + inst.k:
            bound_fail.append(inst.to_json())
    elapsed = time.perf_counter() - start
    ok = not exact_fail and not bound_fail and elapsed < 30 and 0 < trees < 500
    acceptance_line(
        1,
        ok,
        f"G_(D,k) exact k+D-1 on {len(grid)} instances ({len(exact_fail)} misses), "
        f"<= D+k on {len(random500)} random ({trees} trees, {len(bound_fail)} misses), {elapsed:.1f}s",
    )
    assert not exact_fail, exact_fail[:3]
    assert not bound_fail, bound_fail[:1]
    assert elapsed < 30


def test_criterion_2_reduction_bound(acceptance_line):
    start = time.perf_counter()
    rng = random.Random(17)
    trials, violations, undelivered = 1500, [], 0
    for _ in range(trials):
        g, a = random_assignment(rng)
        res = cps.reduce_assignment(g, a)
        if len(res.reduced.parents) + len(res.schedule) > len(a.children) + 1:
            violations.append((sorted(g.edges), dict(a.par)))
        got = cps.simulate_cps(g, res.reduced, res.schedule)
        # rounds in which each child reached its par* collision-free
        if any(not got[x] for x in res.reduced.children) or set(got) != set(a.children):
            undelivered += 1
    elapsed = time.perf_counter() - start
    ok = not violations and not undelivered and elapsed < 10
    acceptance_line(
        2, ok, f"{trials} assignments, {len(violations)} bound violations, {undelivered} undelivered, {elapsed:.1f}s"
    )
    assert not violations, violations[:1]
    assert undelivered == 0
    assert elapsed < 10


def test_criterion_3_label_length(acceptance_line, grid, random500):
    points, field_fails = [], []
    for inst in grid + random500:
        setup, _ = execute(inst, "gather-dplusk")
        points.append((label_size_x(inst.k, inst.graph.max_degree), max_label_bits(setup.labels)))
        forced, _ = execute(inst, "gather-dplusk", mode="large")
        field_fails += large_k_field_failures(inst, forced.labels)
    fit = fit_label_bits(points)
    rep = verify_suite(1)
    fit_line = next(line for line in rep.lines() if "label bits fit" in line)
    ok = fit.within_limits and not field_fails and fit_line.startswith("PASS")
    acceptance_line(
        3,
        ok,
        f"bits <= {fit.a:g}*x + {fit.b:g} over {fit.points} instances; "
        f"{len(field_fails)} large-k fields above max(Δ²+1, S_max); report: {fit_line.strip()}",
    )
    assert fit.a <= 8 and fit.b <= 24
    assert not field_fails, field_fails[:3]
    assert fit_line.startswith("PASS")


def test_criterion_4_large_k_phase_cap(acceptance_line, grid, random500):
    long_phases = []
    for inst in grid + random500:
        setup, t = execute(inst, "gather-dplusk", mode="large")
        cap = inst.graph.max_degree ** 2 + 1
        long_phases += [(inst.to_json(), ph.length) for ph in setup.plan.phases if ph.length > cap]
        assert t.transmitters_by_round() == setup.plan.global_schedule
    g, before = forced_cap_fixture()
    after = cps.cap_schedule(g, before, two_hop_coloring(g))
    delivered = cps.is_cps(g, after.reduced, after.schedule) and after.reduced.par == before.reduced.par
    shortened = len(after.schedule) <= g.max_degree ** 2 + 1 < len(before.schedule)
    ok = not long_phases and delivered and shortened
    acceptance_line(
        4,
        ok,
        f"{len(long_phases)} large-k phases over Δ²+1; fixture {len(before.schedule)} -> "
        f"{len(after.schedule)} rounds, delivery preserved: {delivered}",
    )
    assert not long_phases, long_phases[:1]
    assert delivered and shortened


def _random_graphs(count, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(3, 200)
        cap = n * (n - 1) // 2 - (n - 1)
        if cap == 0:
            continue
        out.append(gen_random(n, rng.randint(1, min(cap, n)), rng.randint(1, min(50, n - 1)), rng.randrange(2**31)))
    return out


def test_criterion_5_ddelta(acceptance_line):
    trees = random_instances(200, seed=5, n_max=200, trees_only=True)
    graphs = _random_graphs(200, seed=6)
    misses, smax_fails = [], []
    for inst in trees + graphs:
        setup, t = execute(inst, "gather-ddelta")
        tree = bfs_tree(inst.graph, inst.sink)
        s_max = sibling_assignment(inst.graph, tree).range_size
        d_src = max(tree.level[v] for v in inst.sources)
        bound = 3 * s_max * (d_src + 1)
        done = completion_round(t)
        if bound != setup.bound or done is None or done > bound:
            misses.append((inst.to_json(), done, bound))
        if len(inst.graph.edges) == inst.graph.node_count - 1 and s_max > max(1, inst.graph.max_degree):
            smax_fails.append(inst.to_json())
    ok = not misses and not smax_fails
    acceptance_line(
        5,
        ok,
        f"{len(trees)} trees + {len(graphs)} graphs, {len(misses)} over 3*S_max*(D'+1), "
        f"{len(smax_fails)} trees with S_max > Δ",
    )
    assert not misses, misses[:1]
    assert not smax_fails


def test_criterion_6_brute_force(acceptance_line):
    start = time.perf_counter()
    count, fails = 0, []
    for inst in small_instances(6, 3):
        count += 1
        D = metrics(inst.graph).diameter
        _, t = execute(inst, "gather-dplusk")
        got = completion_round(t)
        best = bruteforce_optimal_gather(inst, min(D + inst.k, 12))
        if best is None or got is None or not best <= got <= D + inst.k:
            fails.append((inst.to_json(), best, got))
    elapsed = time.perf_counter() - start
    ok = not fails and elapsed < 300
    acceptance_line(6, ok, f"{count} instances with n <= 6, k <= 3: {len(fails)} failures, {elapsed:.1f}s")
    assert not fails, fails[:3]
    assert elapsed < 300


def test_criterion_7_distributed_equals_central(acceptance_line, grid, random500):
    checked, diffs = 0, []
    for inst in grid + random500:
        for mode in ("small", "large"):
            setup, t = execute(inst, "gather-dplusk", mode=mode)
            checked += 1
            if t.transmitters_by_round() != setup.plan.global_schedule:
                diffs.append((inst.to_json(), mode))
    for inst in small_instances(5, 3):
        setup, t = execute(inst, "gather-dplusk")
        checked += 1
        if t.transmitters_by_round() != setup.plan.global_schedule:
            diffs.append((inst.to_json(), setup.mode))
    acceptance_line(7, not diffs, f"{checked} runs compared round by round, {len(diffs)} differences")
    assert not diffs, diffs[:1]


def test_criterion_8_label_necessity(acceptance_line):
    res = label_necessity_check(D=3, p=2, horizon=8)
    rep_line = next(line for line in verify_suite(1, quick=True).lines() if "never finish" in line)
    ok = res["passed"] and res["tied_result"] is None and rep_line.startswith("PASS")
    acceptance_line(
        8, ok, f"tied pendants of G_(3,2): {res['tied_result']} within 8; free optimum {res['free_result']}"
    )
    assert res["tied_result"] is None
    assert rep_line.startswith("PASS")


def test_criterion_9_k_broadcast(acceptance_line):
    insts = random_instances(100, seed=9, n_max=200, k_max=50)
    fails = []
    for inst in insts:
        m = metrics(inst.graph)
        unit_bound = (m.diameter + 2) * (m.max_degree ** 2 + 1)
        for algo, bound in (("kbroadcast-unit", unit_bound), ("kbroadcast-multi", m.diameter + inst.k + unit_bound)):
            setup, t = execute(inst, algo)
            done = completion_round(t)
            everyone = all(setup.goal_ids <= k for k in t.final_knowledge)
            if bound != setup.bound or done is None or done > bound or not everyone:
                fails.append((algo, inst.to_json(), done, bound))
    acceptance_line(9, not fails, f"{len(insts)} instances x 2 reductions, {len(fails)} over their bounds")
    assert not fails, fails[:1]
