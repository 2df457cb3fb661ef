"""A small replicated bias experiment, end to end.

Sweeps homophily and sample size at a fixed prevalence, runs replicated
recruitment samples, and prints the median relative bias of the
differential-activity and homophily estimators per cell. The headline
pattern: degree-based estimands improve with more sampling while the
tree-based homophily estimate does not.
"""

from rdsim import ExperimentPlan, run_experiment

plan = ExperimentPlan(
    node_count=1000,
    mean_degree=20.0,
    prevalences=(0.5,),
    diff_activities=(1.0, 4.0),
    homophily_ratios=(1.0, 5.0),
    sample_sizes=(200, 800),
    num_seeds=5,
    coupons_per_node=2,
    replicates=100,
    master_seed=2025,
)

rows, summary = run_experiment(plan, threads=2)

skips = sorted({row["cell"] for row in rows if row["status"] == "skipped"})
if skips:
    print(f"skipped cells (infeasible targets): {skips}")

print(f"{'Da':>4} {'R':>4} {'n':>5} | {'med RB(Da)':>11} {'med RB(h)':>11} {'med RB(h, induced)':>19}")
cells = {}
for entry in summary:
    key = (entry["diff_activity"], entry["homophily_ratio"], entry["sample_size"])
    cells.setdefault(key, {})[entry["estimand"]] = entry["median"]
for (da, r, n), med in sorted(cells.items()):
    def fmt(value):
        return f"{value:+11.4f}" if value is not None else f"{'skip':>11}"
    print(f"{da:4.1f} {r:4.1f} {n:5d} | {fmt(med.get('diff_activity'))} "
          f"{fmt(med.get('homophily'))} {fmt(med.get('induced_homophily')):>19}")

print("\nNote how |median RB(h)| grows from n=200 to n=800 in the active,")
print("homophilous cell while RB(Da) shrinks. The induced-subgraph oracle")
print("(which sees the hidden within-sample ties) tracks zero in the neutral")
print("cells but inherits the degree-biased sample composition in the")
print("high-activity cell; only a census drives it to exactly zero.")
