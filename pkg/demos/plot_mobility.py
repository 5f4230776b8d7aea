"""
Random waypoint mobility and rendezvous
=======================================

"""

import numpy as np
from driftnet import GridBounds, find_rendezvous, init_mobility, step_mobility

bounds = GridBounds(1000, 1000)
rng = np.random.default_rng(0)
nodes = init_mobility(30, bounds, seed=rng)

# walk for a while and count the groups that come within 20 m
counts = []
for t in range(500):
    nodes = [step_mobility(s, bounds, rng) for s in nodes]
    groups = find_rendezvous(np.array([s.position for s in nodes]), 20.0, t)
    counts.append(len(groups))
print("rendezvous per step:", np.mean(counts))
print("largest group:", max(len(g.member_ids) for g in groups) if groups else 0)
