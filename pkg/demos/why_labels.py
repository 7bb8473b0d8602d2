"""Without distinct labels the two pendants of G_{3,2} can never both get through.

Tied pendants transmit together every time, so the relay always hears a collision.
Exhaustive search over every joint behaviour shows gathering never completes,
while the untied network finishes in k + D - 1 = 4 rounds.
"""

from radiogather.harness import bruteforce_optimal_gather, label_necessity_check
from radiogather.netgraph import gen_lower_bound

inst = gen_lower_bound(3, 2)
print("edges:", sorted(inst.graph.edges), "pendants:", inst.sources)

for h in range(1, 9):
    tied = bruteforce_optimal_gather(inst, h, tied=[inst.sources])
    free = bruteforce_optimal_gather(inst, h)
    print(f"horizon {h}: tied pendants -> {tied}, free -> {free}")

print(label_necessity_check())
