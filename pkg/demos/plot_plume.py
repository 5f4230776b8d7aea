"""
A wandering Gaussian plume
==========================

"""

import numpy as np
from driftnet import GridBounds, PlumeField, concentration, concentration_grid, step_plume

field = PlumeField()
print("peak:", concentration(field, field.center))
print("one sigma away:", concentration(field, (field.center[0] + 50, field.center[1])))

# the center takes fixed-size steps in random directions
rng = np.random.default_rng(1)
bounds = GridBounds(1000, 1000)
for _ in range(200):
    field = step_plume(field, bounds, rng)
print("center after 200 steps:", field.center)

xs = np.linspace(0, 1000, 5)
np.set_printoptions(precision=2, suppress=True)
print(concentration_grid(field, *np.meshgrid(xs, xs)))
