"""Quick self-checks run by ``covclock verify``.

Each check returns ``(name, passed, detail)``. The set mirrors the laws the
library relies on, at dimensions small enough to finish in seconds.
"""
from __future__ import annotations

import numpy as np

from .align import alignment_probability, alignment_probability_timeavg_oracle
from .clock import evolve, make_custom_state, make_quasi_ideal_state, make_swp_state, time_basis_matrix
from .codes import CovariantCode, covariant_encode, covariant_encode_quadrature, make_identity_code
from .phase3 import AngleTriple, middle_angle
from .pipeline import (
    THREE_CLOCK_MIDDLE,
    f_table_quadrature,
    f_tables,
    full_channel,
    full_channel_by_outcomes,
    shift_covariance_check,
    stationarity_residual,
)

__all__ = ["run_invariant_suite"]


def _check(name, value, limit, results):
    results.append((name, bool(value < limit), f"{value:.3e} < {limit:.0e}"))


def run_invariant_suite(seed: int = 0) -> list:
    rng = np.random.default_rng(seed)
    results = []

    worst = max(np.abs(time_basis_matrix(d).conj().T @ time_basis_matrix(d) - np.eye(d)).max()
                for d in range(1, 65))
    _check("time basis orthonormal (d<=64)", worst, 1e-12, results)

    qi = make_quasi_ideal_state(16, 0.0, None, 3.0)
    back = evolve(qi, 2 * np.pi)
    _check("recurrence after one period", abs(1 - abs(np.vdot(qi.amplitudes, back.amplitudes))), 1e-12, results)

    base = make_identity_code(2, [0, 1], [0, 1])
    amp = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    clocks = (make_quasi_ideal_state(6, 0.5, None, 2.0), make_custom_state(amp))
    code = CovariantCode(base, clocks)
    dev = max(np.abs(f_tables(code, [Q])[Q] - f_table_quadrature(code, Q)).max() for Q in range(-2, 3))
    _check("F_Q lag sum equals time average", dev, 1e-9, results)
    _check("outcome probabilities sum to one", abs(f_tables(code, [0])[0].sum() - 1), 1e-10, results)
    _check("shift covariance", max(shift_covariance_check(code, Q, [1, 4], 3) for Q in (-2, 1, 2)),
           1e-10, results)

    rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    single = CovariantCode(base, clocks[:1])
    _check("exact twirl equals quadrature twirl",
           np.abs(covariant_encode(single, rho) - covariant_encode_quadrature(single, rho)).max(),
           1e-10, results)

    three = CovariantCode(make_identity_code(2, [0, 1], [0, 0]), (make_quasi_ideal_state(6, 0, None, 2.0),) * 3)
    fast = full_channel(three, mode=THREE_CLOCK_MIDDLE)
    slow = full_channel_by_outcomes(three, mode=THREE_CLOCK_MIDDLE)
    _check("closed-form channel equals outcome-by-outcome channel", np.abs(fast.choi - slow.choi).max(),
           1e-12, results)
    _check("channel trace preserving", fast.tp_deviation(), 1e-9, results)
    _check("channel completely positive", -fast.min_eigenvalue(), 1e-8, results)

    d = 12
    errs = 0
    for _ in range(50):
        g = rng.integers(0, d, 3)
        c = int(rng.integers(0, d))
        v, _w = middle_angle(AngleTriple(tuple(g), d))
        v2, _w2 = middle_angle(AngleTriple(tuple((g + c) % d), d))
        errs += (v + c) % d != v2
    _check("middle angle rotation covariance (mismatches)", errs, 1, results)

    frame = make_quasi_ideal_state(16, 0.0, None, 2.0)
    _check("alignment exact sum equals time average",
           abs(alignment_probability(frame).p - alignment_probability_timeavg_oracle(frame).p), 1e-10, results)
    _check("SWP alignment probability equals 1/d",
           abs(alignment_probability(make_swp_state(16)).p - 1 / 16), 1e-12, results)

    pw = CovariantCode(make_identity_code(2, [0, 0], [0, 1]), (make_quasi_ideal_state(16, 0.0, None, 4.0),))
    _check("conditioned encoding is stationary", stationarity_residual(pw, np.full((2, 2), 0.5)), 1e-10, results)
    return results
