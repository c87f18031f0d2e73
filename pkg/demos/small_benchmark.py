"""
A small factorial benchmark
===========================

Generate random connected networks, learn them with the score-based and
both constraint-based variants, and summarize F1 per cell. The output
directory holds the long results file, a summary and markdown tables.
"""

import sys
import tempfile

from ctbnlearn.benchmark import ExperimentPlan, run_benchmark

plan = ExperimentPlan(nodes=(5,), densities=(0.2, 0.3), cardinalities=(2, 3), trajectories=(50,),
                      replicates=2, seed=7)
out = sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="ctbn-bench-")
summary = run_benchmark(plan, out)

# %%
print(f"{'algorithm':>10} {'d':>4} {'m':>2} {'F1':>6} {'dBIC%':>7} {'sec':>6}")
for s in summary:
    dbic = s["delta_bic_percent_mean"]  # NaN for the reference algorithm itself
    print(f"{s['algorithm']:>10} {s['density']:>4} {s['cardinality']:>2} {s['f1_mean']:6.3f} "
          f"{dbic:7.3f} {s['wall_seconds_mean']:6.2f}")
print("files in", out)
