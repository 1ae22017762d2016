"""
Reading the clock recovers the dynamics
=======================================

With no logical rotation, the encoded state is stationary. Conditioning on
a clock reading still reproduces the physical evolution, and more so as the
clock grows.
"""

import numpy as np

from covclock import CovariantCode, make_identity_code, make_quasi_ideal_state
from covclock.pipeline import page_wootters_condition, stationarity_residual

base = make_identity_code(2, [0, 0], [0, 1])
plus = np.full((2, 2), 0.5)
for d in (16, 32, 64):
    code = CovariantCode(base, (make_quasi_ideal_state(d, 0, None, np.sqrt(d)),))
    print(f"d={d:3d}  stationarity={stationarity_residual(code, plus):.1e}  "
          f"distance at tau=1: {page_wootters_condition(code, plus, 1.0):.4f}")
