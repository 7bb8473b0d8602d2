"""Completion time on G_{D,k} equals k + D - 1 across a grid, and stays below D + k."""

from radiogather.harness import ExperimentConfig, results_csv, run_experiment

rows = run_experiment(ExperimentConfig("gather-dplusk", generator="lower-bound"))

print(" D \\ k " + "".join(f"{k:>4}" for k in range(1, 9)))
for D in range(2, 11):
    line = [r.completion_round for r in rows if r.D == D]
    print(f"{D:>6} " + "".join(f"{c:>4}" for c in line))

assert all(r.completion_round == r.D + r.k - 1 for r in rows)
print(f"{len(rows)} instances, every one finishes in k + D - 1 rounds")

# the same table as CSV, for external plotting
print(results_csv(rows[:3]), end="")
