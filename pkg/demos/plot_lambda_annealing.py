"""
Annealing the decay constant
============================

"""

import numpy as np
from driftnet import AnnealingSchedule, DriftParams, grid_search_lambda, optimize_lambda, synthesize_trace

rng = np.random.default_rng(3)
trace = synthesize_trace(DriftParams((0.5, 2.5, 1.5)), (0.002,) * 3, 100.0, rng, steps=200)

history = []
lam, err = optimize_lambda(trace, AnnealingSchedule(), seed=4,
                           callback=lambda it, p, e, best, acc: history.append(best))
print(f"annealed: lambda={lam:.4f} error={err:.5f}")
print("best error every 100 iterations:", np.round(history[::100], 5))

# an exhaustive scan for comparison
print("grid: lambda=%.4f error=%.5f" % grid_search_lambda(trace))
