"""Command line entry: ``python3 -m radiogather <command>``.

Exit codes: 0 success / all bounds hold, 1 a bound or invariant failed,
2 invalid input or configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from .harness import (
    ConfigError,
    ExperimentConfig,
    GuardError,
    bruteforce_optimal_gather,
    results_csv,
    run_experiment,
    verify_suite,
)
from .labels import label_to_dict
from .netgraph import InstanceError, gen_lower_bound, gen_random, load_graph, metrics
from .radio_sim import completion_round, transcript_csv
from .runtime import ALGORITHMS, execute, prepare


def _write(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_instance(path: str):
    if path == "-":
        return load_graph(sys.stdin.read())
    with open(path) as fh:
        return load_graph(fh.read())


def _parse_seeds(text: str) -> list[int]:
    """``5`` -> [5]; ``0:100`` -> 0..99; ``1,4,9`` -> those seeds."""
    if ":" in text:
        lo, hi = text.split(":", 1)
        return list(range(int(lo), int(hi)))
    return [int(x) for x in text.split(",") if x.strip()]


def _parse_range(text: str) -> list[int]:
    if "-" in text:
        lo, hi = text.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",")]


def cmd_gen(args) -> int:
    if args.kind == "lower-bound":
        inst = gen_lower_bound(args.D, args.p)
    else:
        inst = gen_random(args.n, args.extra, args.k, args.seed)
    _write(inst.to_json() + "\n", args.out)
    return 0


def cmd_labels(args) -> int:
    inst = _read_instance(args.instance)
    setup = prepare(inst, args.algo, args.mode)
    rows = []
    for v in range(inst.graph.node_count):
        lab = setup.labels.get(v)
        if isinstance(lab, tuple):
            rows.append({"node": v, "gather": label_to_dict(v, lab[0]), "broadcast": label_to_dict(v, lab[1])})
        else:
            rows.append(label_to_dict(v, lab))
    _write(json.dumps({"algorithm": args.algo, "mode": setup.mode, "labels": rows}, indent=1) + "\n", args.out)
    return 0


def cmd_run(args) -> int:
    inst = _read_instance(args.instance)
    setup, t = execute(inst, args.algo, args.limit, args.mode)
    done = completion_round(t, setup.goal)
    text = transcript_csv(t) if args.format == "csv" else t.to_json() + "\n"
    _write(text, args.out)
    ok = done is not None and done <= setup.bound
    print(
        f"{args.algo}: completion_round={done} bound={setup.bound} status={t.status}"
        + (f" error={t.error}" if t.error else ""),
        file=sys.stderr,
    )
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    params = {"n": args.n, "extra_edges": args.extra, "k": args.k}
    if args.generator == "lower-bound":
        params = {"D": _parse_range(args.D_range), "k": _parse_range(args.k_range)}
    elif args.generator == "file":
        params = {"path": args.instance}
    cfg = ExperimentConfig(
        algorithm=args.algo,
        generator=args.generator,
        params=params,
        seeds=_parse_seeds(args.seed),
        round_limit=args.limit,
        mode=args.mode,
        out=args.out,
    )
    rows = run_experiment(cfg)
    if not args.out:
        sys.stdout.write(results_csv(rows))
    bad = [r for r in rows if not r.bound_satisfied]
    print(f"{len(rows)} rows, {len(bad)} bound violations", file=sys.stderr)
    return 1 if bad else 0


def cmd_verify(args) -> int:
    rep = verify_suite(args.seeds, quick=args.quick)
    _write(rep.text(), args.out)
    return 0 if rep.passed else 1


def cmd_oracle(args) -> int:
    inst = _read_instance(args.instance)
    horizon = args.limit
    if horizon is None:
        horizon = min(metrics(inst.graph).diameter + inst.k, 12)
    best = bruteforce_optimal_gather(inst, horizon)
    _write(json.dumps({"optimal_rounds": best, "horizon": horizon}) + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="radiogather", description="Label-driven gathering in radio networks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, algo=True, limit=True):
        if algo:
            sp.add_argument("--algo", choices=sorted(ALGORITHMS), default="gather-dplusk")
            sp.add_argument("--mode", choices=["small", "large"], default=None, help="force the gathering label variant")
        if limit:
            sp.add_argument("--limit", type=int, default=None, help="round limit (oracle: horizon)")
        sp.add_argument("--out", default=None, help="output file (default stdout)")

    g = sub.add_parser("gen", help="emit an instance as JSON")
    g.add_argument("--kind", choices=["random", "lower-bound"], default="random")
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--extra", type=int, default=0)
    g.add_argument("--k", type=int, default=5)
    g.add_argument("--D", type=int, default=3)
    g.add_argument("--p", type=int, default=2)
    g.add_argument("--seed", type=int, default=0)
    common(g, algo=False, limit=False)
    g.set_defaults(func=cmd_gen)

    lab = sub.add_parser("labels", help="emit the labels of an instance as JSON")
    lab.add_argument("instance", help="instance JSON file, or - for stdin")
    common(lab, limit=False)
    lab.set_defaults(func=cmd_labels)

    r = sub.add_parser("run", help="simulate one instance and write its transcript")
    r.add_argument("instance")
    r.add_argument("--format", choices=["json", "csv"], default="json")
    common(r)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run an experiment and write the result CSV")
    s.add_argument("--generator", choices=["random", "lower-bound", "file"], default="random")
    s.add_argument("--instance", default=None, help="instance file for --generator file")
    s.add_argument("--n", type=int, default=50)
    s.add_argument("--extra", type=int, default=0)
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--D-range", dest="D_range", default="2-10")
    s.add_argument("--k-range", dest="k_range", default="1-8")
    s.add_argument("--seed", default="0:10", help="seed, list a,b,c or range lo:hi")
    common(s)
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("verify", help="run the invariant suite")
    v.add_argument("--seeds", type=int, default=1, help="seed count")
    v.add_argument("--quick", action="store_true")
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="brute-force optimal gathering time (n <= 10)")
    o.add_argument("instance")
    common(o, algo=False)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (InstanceError, ConfigError, GuardError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
