"""
Refitting a calibration table
=============================

"""

import numpy as np
from driftnet import (
    CalibrationTuple, DriftParams, WeightScheme, fit_wls, invert_response, measure, true_params_at,
)

start = DriftParams((0.5, 2.5, 1.5))
alpha = (0.004,) * 3
rng = np.random.default_rng(2)

# one tuple every 10 steps at a random stimulus
table = []
for t in range(0, 400, 10):
    x = rng.uniform(0, 100)
    table.append(CalibrationTuple(measure(true_params_at(start, alpha, t), x), x, t))

# old tuples describe an older sensor; down-weighting them sharpens the estimate
y = measure(true_params_at(start, alpha, 400), 50.0)
print("stimulus 50 read with start params:", round(invert_response(start, y, 200.0), 2))
for scheme in (WeightScheme("uniform"), WeightScheme("reciprocal_age"), WeightScheme("exponential", 0.05)):
    fit = fit_wls(table, scheme, 400)
    print(f"{scheme.kind:>15}: {invert_response(fit, y, 200.0):.2f}")
