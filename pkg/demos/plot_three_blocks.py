"""
Three clocks and an unknown phase kick
======================================

Three identical clocks are read out and the decoder takes the circular
median. One clock is kicked forward by an unknown amount; the decoder never
learns which clock or by how much.
"""

import numpy as np

from covclock import make_identity_code, make_quasi_ideal_state
from covclock.phase3 import PhaseErrorSpec, middle_angle, AngleTriple, three_clock_code, three_clock_pipeline

print(middle_angle(AngleTriple((10, 2, 9), 12)))

d = 16
code = three_clock_code(make_identity_code(2, [0, 1], [0, 0]), make_quasi_ideal_state(d, 0, None, np.sqrt(d)))
for t in np.linspace(0, 2 * np.pi, 5, endpoint=False):
    rep = three_clock_pipeline(code, PhaseErrorSpec(2, t), restarts=4)
    print(f"kick={t:.2f}  1-f={1 - rep.f_direct:.4f}")
