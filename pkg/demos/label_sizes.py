"""How label length grows with min(k, Δ), and the linear envelope fitted to it."""

from radiogather.harness import fit_label_bits, label_size_x, max_label_bits, random_instances
from radiogather.runtime import prepare

points = []
by_x = {}
for inst in random_instances(200, seed=1, n_max=150, k_max=60):
    setup = prepare(inst, "gather-dplusk")
    x = label_size_x(inst.k, inst.graph.max_degree)
    bits = max_label_bits(setup.labels)
    points.append((x, bits))
    by_x.setdefault(x, []).append((bits, setup.mode))

for x in sorted(by_x):
    sizes = [b for b, _ in by_x[x]]
    large = sum(m == "large" for _, m in by_x[x])
    print(f"ceil(log2(min(k,Δ)+2)) = {x}: {len(sizes):>3} instances, bits {min(sizes)}..{max(sizes)}, {large} in large-k mode")

fit = fit_label_bits(points)
print(f"envelope: bits <= {fit.a:g} * x + {fit.b:g}  (tight at {fit.worst})")
