"""Walk through gathering on the smallest lower-bound graph G_{2,2}.

Sink 0 - relay 1 - two pendants 2 and 3 holding ids 1 and 2.
"""

from radiogather import build_plan, gen_lower_bound, labels_small_k, run
from radiogather.labels import encode_label

inst = gen_lower_bound(2, 2)
print("edges:", sorted(inst.graph.edges), "sources:", inst.sources, "sink:", inst.sink)

# the oracle plans phases centrally
plan = build_plan(inst)
for i, ph in enumerate(plan.phases):
    rounds = [sorted(r) for r in ph.schedule.rounds]
    print(f"phase {i}: children {ph.children} -> parents {sorted(ph.parents)}, rounds {rounds}")

# and hands each node a short label
labels = labels_small_k(plan)
for v in range(inst.graph.node_count):
    lab = labels[v]
    print(f"node {v}: {lab}  bits={encode_label(lab)!r}")

# nodes then run with nothing but their label and what they hear
t = run(inst, labels, "gather-dplusk", round_limit=20)
for rec in t.rounds:
    heard = {w: sorted(rec.packets[s].ids) for w, s in rec.deliveries.items()}
    print(f"round {rec.round}: transmit {rec.transmitters}, heard {heard}")
print("sink knows", sorted(t.final_knowledge[inst.sink]), "after", t.last_round, "rounds (D + k - 1 = 3)")
