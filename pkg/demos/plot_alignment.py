"""
Sharing a reference frame
=========================

Probability that a shared frame state fails to align, from exact sums over
energy populations and, as a cross-check, from averaging over a period.
"""

import numpy as np

from covclock import make_quasi_ideal_state, make_swp_state
from covclock.align import alignment_probability, alignment_probability_timeavg_oracle

for d in (32, 64, 128, 256):
    frame = make_quasi_ideal_state(d, 0, None, np.log(d) ** 1.5)
    exact = alignment_probability(frame).p
    averaged = alignment_probability_timeavg_oracle(frame).p
    print(f"d={d:4d}  gaussian p={exact:.5f}  (time average {averaged:.5f})  time-basis p={alignment_probability(make_swp_state(d)).p:.5f}")
