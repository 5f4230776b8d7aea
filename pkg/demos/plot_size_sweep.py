"""
Network size and contact rate
=============================

"""

from driftnet import ExperimentConfig, run_size_sweep

config = ExperimentConfig().with_overrides(["steps=300", "repetitions=2", "annealing.iterations=50"])
result = run_size_sweep(config, sizes=(5, 20, 50), condition="linear")

for row in result["table"]:
    print(f"{row['n_sensors']:>3} sensors: {row['mean_error']:.3f} % error, "
          f"{row['rendezvous_per_step']:.2f} rendezvous/step")
print("spearman(error, size):", result["summary"]["error_size_spearman"])
