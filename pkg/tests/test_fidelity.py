import numpy as np
import pytest

from conftest import random_density
from covclock.channels import kraus_to_choi
from covclock.clock import make_custom_state, make_quasi_ideal_state, make_swp_state
from covclock.codes import CovariantCode, make_identity_code, make_unitary_conjugation_code
from covclock.fidelity import (
    converse_bound,
    code_converse_bound,
    f_worst_direct,
    f_worst_lower,
    fidelity_report,
    fit_inverse_d,
    product_input_minimum,
    theorem_curves,
)
from covclock.pipeline import ChannelLawError, ChannelMatrix, full_channel

QUBIT = make_identity_code(2, [0, 1], [0, 0])


def as_channel(kraus):
    d = kraus[0].shape[1]
    return ChannelMatrix(kraus_to_choi(kraus), d, kraus[0].shape[0])


def test_lower_bound_examples():
    for d in (8, 16, 32):
        code = CovariantCode(QUBIT, (make_swp_state(d),))
        assert abs(f_worst_lower(code) - (1 - 3 * np.sqrt(2) / d)) < 1e-12
    wide = make_identity_code(2, [0, 2], [0, 0])
    for d in (8, 16):
        code = CovariantCode(wide, (make_swp_state(d, 3),))
        assert abs(f_worst_lower(code) - (1 - 6 * np.sqrt(2) / d)) < 1e-12


def test_trivial_logical_generator_has_perfect_lower_bound():
    code = CovariantCode(make_identity_code(2, [0, 0], [0, 0]), (make_swp_state(5),))
    assert abs(f_worst_lower(code) - 1) < 1e-14


def test_lower_bound_below_direct_on_random_configurations():
    rng = np.random.default_rng(3)
    checked = 0
    while checked < 50:
        d = int(rng.integers(3, 13))
        kind = rng.integers(3)
        if kind == 0:
            clock = make_swp_state(d, int(rng.integers(d)))
        elif kind == 1:
            clock = make_quasi_ideal_state(d, float(rng.uniform(0, d)), None, float(rng.uniform(1, d / 2)))
        else:
            clock = make_custom_state(rng.standard_normal(d) + 1j * rng.standard_normal(d))
        levels = sorted(int(x) for x in rng.integers(0, 3, 2))
        code = CovariantCode(make_identity_code(2, levels, [0, 0]), (clock,))
        ch = full_channel(code)
        lo = f_worst_lower(code)
        hi = f_worst_direct(ch, restarts=4, seed=checked)[0]
        assert lo <= hi + 1e-6
        checked += 1


def test_identity_channel_has_unit_fidelity():
    for d in (2, 3):
        assert abs(f_worst_direct(as_channel([np.eye(d)]))[0] - 1) < 1e-9


def test_dephasing_against_grid_search():
    Z = np.diag([1.0, -1.0])
    ch = as_channel([np.eye(2) / np.sqrt(2), Z / np.sqrt(2)])
    value, phi = f_worst_direct(ch)
    assert abs(value - 0.5) < 1e-7
    assert abs(np.linalg.norm(phi) - 1) < 1e-12

    # brute force over Schmidt-form inputs sqrt(c)|00> + e^{ia} sqrt(1-c)|11>
    J4 = ch.choi.reshape(2, 2, 2, 2)
    best = np.inf
    for c in np.linspace(0, 1, 101):
        for a in np.linspace(0, 2 * np.pi, 13):
            phi = np.diag([np.sqrt(c), np.sqrt(1 - c) * np.exp(1j * a)])
            R = phi @ phi.conj().T
            best = min(best, np.einsum("iajb,ia,jb->", J4, R, R.conj()).real)
    assert abs(best - value) < 1e-6


def test_entangled_inputs_are_never_worse_than_needed(rng):
    base = make_unitary_conjugation_code(np.eye(4)[:, [1, 2]], [np.diag([1, 1, -1, 1])], [0, 1], [0, 1, 1, 2])
    code = CovariantCode(base, (make_quasi_ideal_state(6, 0, None, 2.0),))
    ch = full_channel(code)
    assert product_input_minimum(ch) >= f_worst_direct(ch)[0] - 1e-9


def test_restart_count_does_not_change_answer():
    code = CovariantCode(QUBIT, (make_quasi_ideal_state(10, 0.5, None, 2.0),))
    ch = full_channel(code)
    a = f_worst_direct(ch, restarts=16)[0]
    b = f_worst_direct(ch, restarts=32, seed=7)[0]
    assert abs(a - b) < 1e-8


def test_swp_direct_fidelity_closed_form():
    for d in (4, 8, 16):
        code = CovariantCode(QUBIT, (make_swp_state(d),))
        assert abs(f_worst_direct(full_channel(code))[0] - (1 - 1 / (2 * d))) < 1e-8


def test_swp_constant_is_stable():
    ds = [8, 16, 32, 64]
    gaps = [1 - f_worst_lower(CovariantCode(QUBIT, (make_swp_state(d),))) for d in ds]
    C = fit_inverse_d(ds, gaps)
    for d, g in zip(ds, gaps):
        assert abs(g * d / C - 1) < 0.1


def test_converse_examples():
    assert converse_bound(1, 0, 1, 2) == 0.984375
    assert converse_bound(0, 3, 1, 2) == 1
    assert abs(converse_bound(1, 1, 2, 2) - 0.9975) < 1e-15
    code = CovariantCode(QUBIT, (make_swp_state(8),))
    assert code_converse_bound(code) == converse_bound(1, 0, 1, 8)


@pytest.mark.parametrize("d", [8, 16, 32])
def test_direct_fidelity_respects_converse(d):
    code = CovariantCode(QUBIT, (make_quasi_ideal_state(d, 0, None, np.sqrt(d)),))
    rep = fidelity_report(code, restarts=4)
    assert rep.f_direct <= rep.f_converse + 1e-9
    assert rep.f_lower <= rep.f_direct + 1e-6


def test_theorem_curve_examples():
    x = 64
    expect = 1 - 3 * np.pi * np.sqrt(2) / 4 * (np.log(x) ** 3 / x) ** 2
    assert abs(theorem_curves("QI_leading", d_C=64, d_L=2, d_P=1, dh=1) - expect) < 1e-15
    assert abs(theorem_curves("QI_Lsite_leading", d_C=16, L=4, d_L=2, d_P=1, dh=1) - expect) < 1e-15
    assert theorem_curves("SWP_form", d_C=10, C=2.0) == 0.8
    assert theorem_curves("three_block_shape", d_C=10**6, d_L=2, d_P=1, dh=1) < 1
    with pytest.raises(ValueError):
        theorem_curves("nonsense")


def test_report_fields(rng):
    code = CovariantCode(QUBIT, (make_swp_state(6),))
    rep = fidelity_report(code, restarts=2, params={"tag": "x"})
    assert rep.params["tag"] == "x" and rep.params["d"] == 6
    assert rep.minimizer_state.shape == (2, 2)
    rho = random_density(rng, 2)
    assert abs(np.trace(rep.channel.apply(rho)) - 1) < 1e-12


def test_invalid_channel_rejected():
    bad = ChannelMatrix(np.diag([1.0, -0.5, 0.0, 1.0]).astype(complex), 2, 2)
    with pytest.raises(ChannelLawError):
        f_worst_direct(bad)
