"""
Drifting response and its inverse
=================================

"""

import numpy as np
from driftnet import DriftParams, invert_response, measure, true_params_at

start = DriftParams((0.5, 2.5, 1.5))
alpha = (0.002, 0.002, 0.002)

# every coefficient grows by 0.2% per step
for t in (0, 250, 500, 1000):
    p = true_params_at(start, alpha, t)
    print(t, np.round(p.coeffs, 3), "response to 50:", round(measure(p, 50.0), 1))

# reading a drifted output through stale parameters overestimates the stimulus
y = measure(true_params_at(start, alpha, 500), 50.0)
print("stale estimate:", invert_response(start, y, x_max=200.0))
print("fresh estimate:", invert_response(true_params_at(start, alpha, 500), y, x_max=200.0))
