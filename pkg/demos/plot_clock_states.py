"""
Clock states and their time readout
===================================

Build a single time-basis clock and a Gaussian-weighted one, then look at
how each readout looks half a tick later.
"""

import numpy as np

from covclock import evolve, make_quasi_ideal_state, make_swp_state
from covclock.clock import time_basis_overlaps

d = 32
half_tick = np.pi / d


def readout(state):
    return np.abs(time_basis_overlaps(state.amplitudes)) ** 2


###############################################################################
# A time-basis clock reads one tick with certainty, but half a tick later
# its readout is smeared over the dial.
swp = make_swp_state(d, 0)
print("time-basis clock, largest probability now:", readout(swp).max())
print("time-basis clock, largest probability half a tick later:", readout(evolve(swp, half_tick)).max())

###############################################################################
# The Gaussian-weighted clock is less sharp to begin with, and its readout
# changes far less as it ticks.
qi = make_quasi_ideal_state(d, 0, None, 3.0)
print("gaussian clock, largest probability now:", readout(qi).max())
print("gaussian clock, largest probability half a tick later:", readout(evolve(qi, half_tick)).max())
