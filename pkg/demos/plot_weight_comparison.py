"""
Comparing weighting schemes
===========================

A scaled-down network so the script runs in seconds; the command
``driftnet compare-weights`` runs the full-size experiment.
"""

from driftnet import ExperimentConfig, run_weight_comparison

config = ExperimentConfig().with_overrides(["steps=300", "repetitions=3", "annealing.iterations=100"])
summary = run_weight_comparison(config)["summary"]

for name, row in summary["conditions"].items():
    print(f"{name:>13}: {row['time_avg_error_mean']:.3f} %")
for name, pct in summary["reductions_pct"].items():
    print(f"{name:>13}: {pct:+.1f} % vs uncalibrated")
print("p(optimized vs linear):", summary["p_values"]["optimized_vs_linear"])
