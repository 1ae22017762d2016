"""
The effective channel and its worst-case fidelity
=================================================

Assemble the end-to-end channel for a small code, confirm it is a valid
channel, and minimise its entanglement fidelity.
"""

import numpy as np

from covclock import CovariantCode, f_worst_direct, f_worst_lower, full_channel, make_unitary_conjugation_code
from covclock import make_quasi_ideal_state

encoder = np.eye(4)[:, [1, 2]]
noise = [np.diag([1, 1, -1, 1])]
base = make_unitary_conjugation_code(encoder, noise, [0, 1], [0, 1, 1, 2])
code = CovariantCode(base, (make_quasi_ideal_state(24, 0, None, 3.0),))

channel = full_channel(code).check()
print("trace-preservation error", channel.tp_deviation())
print("smallest Choi eigenvalue", channel.min_eigenvalue())

value, phi = f_worst_direct(channel)
print("worst-case fidelity", value, "lower bound", f_worst_lower(code))
