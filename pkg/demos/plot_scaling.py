"""
How protection improves with clock size
=======================================

Compare the worst-case fidelity bound for a qubit code protected by a
time-basis clock and by a Gaussian clock of tuned width.
"""

from covclock import CovariantCode, f_worst_lower, make_identity_code, make_swp_state
from covclock.experiments import fit_loglog, optimize_sigma

base = make_identity_code(2, [0, 1], [0, 0])
ds = [16, 32, 64, 128]

swp_gap = [1 - f_worst_lower(CovariantCode(base, (make_swp_state(d),))) for d in ds]
qi_gap = []
for d, g in zip(ds, swp_gap):
    sigma, gap = optimize_sigma(base, d, 1.0, d / 4)
    qi_gap.append(gap)
    print(f"d={d:4d}  time-basis gap={g:.3e}  gaussian gap={gap:.3e}  sigma={sigma:.2f}")

###############################################################################
# Slopes on log-log axes: about -1 for the time-basis clock, steeper for
# the Gaussian clock.
print("time-basis slope", round(fit_loglog(ds, swp_gap)[0], 3))
print("gaussian slope", round(fit_loglog(ds, qi_gap)[0], 3))
