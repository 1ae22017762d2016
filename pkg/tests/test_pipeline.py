import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from covclock.channels import identity_choi, partial_trace, trace_distance
from covclock.clock import embed_L, make_custom_state, make_quasi_ideal_state, make_swp_state
from covclock.codes import CovariantCode, covariant_encode, make_identity_code, make_unitary_conjugation_code
from covclock.pipeline import (
    SINGLE_CLOCK,
    THREE_CLOCK_MIDDLE,
    ConditionedState,
    F_Q,
    OutcomeRecord,
    Readout,
    choose_k_alpha,
    conditioned_state,
    decode,
    f_table_quadrature,
    f_tables,
    full_channel,
    full_channel_by_outcomes,
    outcome_records,
    p_ratio,
    page_wootters_condition,
    quadrature_grid_size,
    shift_covariance_check,
    stationarity_residual,
    tensor_readout,
)

QUBIT = make_identity_code(2, [0, 1], [0, 0])


def random_clock(rng, d):
    return make_custom_state(rng.standard_normal(d) + 1j * rng.standard_normal(d))


def direct_double_loop(psi, d, k, Q):
    """F_Q for one clock from the energy double sum, written out longhand."""
    total = 0j
    for r in range(d):
        for rp in range(d):
            if r - rp + Q != 0:
                continue
            a = psi[r] * np.exp(2j * np.pi * k * r / d) / np.sqrt(d)
            b = psi[rp] * np.exp(2j * np.pi * k * rp / d) / np.sqrt(d)
            total += a * np.conj(b)
    return total


@pytest.mark.parametrize("d,k0", [(5, 0), (8, 3), (12, 11)])
def test_swp_closed_form(d, k0):
    code = CovariantCode(QUBIT, (make_swp_state(d, k0),))
    psi = code.clocks[0].amplitudes
    for k in range(d):
        for Q in (-1, 0, 1):
            closed = (1 / d) * (1 - abs(Q) / d) * np.exp(2j * np.pi * (k0 - k) * Q / d)
            assert abs(F_Q(code, Q, [k]) - closed) < 1e-14
            assert abs(direct_double_loop(psi, d, k, Q) - closed) < 1e-14


@settings(max_examples=25, deadline=None)
@given(d=st.integers(2, 24), seed=st.integers(0, 10**6))
def test_single_clock_outcomes_equally_likely(d, seed):
    rng = np.random.default_rng(seed)
    code = CovariantCode(QUBIT, (random_clock(rng, d),))
    F0 = f_tables(code, [0])[0]
    assert np.abs(F0 - 1 / d).max() < 1e-12


def _matrix_codes():
    rng = np.random.default_rng(11)
    two = make_identity_code(2, [0, 2], [0, 1])
    out = []
    for d in (3, 8, 17, 32):
        out.append((f"swp-{d}", CovariantCode(two, (make_swp_state(d, 1),))))
        out.append((f"qi-{d}", CovariantCode(two, (make_quasi_ideal_state(d, 0.5, None, min(3.0, d / 2)),))))
        out.append((f"rand-{d}", CovariantCode(two, (random_clock(rng, d),))))
        out.append((f"pair-{d}", CovariantCode(two, (make_quasi_ideal_state(d, 0, None, min(2.0, d / 2)),
                                                      random_clock(rng, d)))))
    for d in (4, 9):
        out.append((f"triple-{d}", CovariantCode(two, (make_swp_state(d, 2), random_clock(rng, d),
                                                        make_quasi_ideal_state(d, 0, None, 1.5)))))
    return out


MATRIX = _matrix_codes()


@pytest.mark.parametrize("name,code", MATRIX, ids=[m[0] for m in MATRIX])
def test_lag_sums_match_time_average(name, code):
    R = code.base.charge_range()
    tables = f_tables(code, range(-R, R + 1))
    for Q in range(-R, R + 1):
        assert np.abs(tables[Q] - f_table_quadrature(code, Q)).max() < 1e-9
    assert abs(tables[0].sum() - 1) < 1e-10


@pytest.mark.parametrize("name,code", MATRIX[:8], ids=[m[0] for m in MATRIX[:8]])
def test_single_outcome_matches_table(name, code):
    tables = f_tables(code, [-1, 2])
    for k in itertools.islice(itertools.product(range(code.d), repeat=len(code.clocks)), 20):
        assert abs(F_Q(code, -1, k) - tables[-1][k]) < 1e-14
        assert abs(F_Q(code, 2, k) - tables[2][k]) < 1e-14


def test_quadrature_refuses_aliasing_grid():
    code = CovariantCode(QUBIT, (make_swp_state(8),))
    with pytest.raises(ValueError):
        f_table_quadrature(code, 1, grid=8)
    assert quadrature_grid_size(2, 8, 1) == 32


def test_exchange_symmetry(rng):
    c = make_quasi_ideal_state(7, 0.2, None, 2.0)
    code = CovariantCode(QUBIT, (c, c, random_clock(rng, 7)))
    T = f_tables(code, [1])[1]
    assert np.abs(T - T.transpose(1, 0, 2)).max() < 1e-12


def test_shift_covariance_examples(rng):
    code = CovariantCode(QUBIT, (make_quasi_ideal_state(8, 0, None, 2.0),))
    assert shift_covariance_check(code, 1, [3], 0) == 0
    assert shift_covariance_check(code, 1, [3], 8) < 1e-12
    for _ in range(10):
        l = int(rng.integers(-20, 20))
        assert shift_covariance_check(code, int(rng.integers(-1, 2)), [int(rng.integers(8))], l) < 1e-10
    multi = CovariantCode(QUBIT, (random_clock(rng, 6), random_clock(rng, 6)))
    assert shift_covariance_check(multi, 1, [2, 5], 4) < 1e-10


def test_choose_k_alpha_examples():
    d = 8
    code = CovariantCode(QUBIT, (make_swp_state(d, 2),))
    assert choose_k_alpha(SINGLE_CLOCK, [2 + d // 2], code) == d / 2
    assert choose_k_alpha(SINGLE_CLOCK, [2], code) == 0
    half = CovariantCode(QUBIT, (make_quasi_ideal_state(d, 0.5, None, 2.0),))
    assert choose_k_alpha(SINGLE_CLOCK, [4], half) == 3.5
    with pytest.raises(ValueError):
        choose_k_alpha(SINGLE_CLOCK, [1, 2], code)
    with pytest.raises(ValueError):
        choose_k_alpha(THREE_CLOCK_MIDDLE, [1], code)
    assert choose_k_alpha(lambda ks, c: ks[:, 0] * 0 + 11.5, [1], code) == 3.5


def test_p_ratio_examples():
    d = 10
    code = CovariantCode(QUBIT, (make_swp_state(d, 4),))
    for k in range(d):
        ka = choose_k_alpha(SINGLE_CLOCK, [k], code)
        assert abs(p_ratio(code, 0, [k], ka)) < 1e-15
        for Q in (-1, 1):
            assert abs(abs(p_ratio(code, Q, [k], ka)) - abs(Q) / d) < 1e-13
    qi = CovariantCode(QUBIT, (make_quasi_ideal_state(32, 0, None, 3.0),))
    for k in range(32):
        assert abs(p_ratio(qi, 1, [k], choose_k_alpha(SINGLE_CLOCK, [k], qi))) < 1 / 32


def test_p_ratio_rejects_unsupported_outcome():
    code = CovariantCode(QUBIT, (make_swp_state(2),))
    stuck = Readout(np.array([0, 1]), np.array([1.0 + 0j, 0]), np.eye(2, dtype=complex))
    assert abs(F_Q(code, 0, [1], [stuck])) == 0
    with pytest.raises(ValueError):
        p_ratio(code, 1, [1], 0.0, [stuck])


def test_conditioned_state_is_normalised(rng):
    base = make_unitary_conjugation_code(np.eye(4)[:, [1, 2]], [np.diag([1, 1, -1, 1])], [0, 1], [0, 1, 1, 2])
    code = CovariantCode(base, (make_quasi_ideal_state(6, 0, None, 2.0), random_clock(rng, 6)))
    for _ in range(20):
        rho = random_density(rng, 2)
        k = tuple(int(x) for x in rng.integers(0, 6, 2))
        cs = conditioned_state(code, rho, 0, k)
        assert abs(np.trace(cs.rho) - 1) < 1e-10
        assert cs.record.k_vec == k


def test_conditioned_state_near_encoding_at_peak(rng):
    d = 16
    code = CovariantCode(QUBIT, (make_quasi_ideal_state(d, 0, None, 2.5),))
    rho = random_density(rng, 2)
    cs = conditioned_state(code, rho, 0, [0])
    assert cs.record.t_alpha == 0
    pmax = max(abs(p_ratio(code, Q, [0], 0.0)) for Q in (-1, 1))
    assert trace_distance(cs.rho, rho) < pmax * code.base.d_P


def test_outcome_average_equals_reduced_encoding(rng):
    base = make_identity_code(2, [0, 1], [0, 1])
    clocks = (make_quasi_ideal_state(5, 0, None, 2.0), random_clock(rng, 5))
    code = CovariantCode(base, clocks)
    rho = random_density(rng, 2)
    total = sum(rec.prob * conditioned_state(code, rho, 0, rec.k_vec).rho
                for rec in outcome_records(code))
    reduced = partial_trace(covariant_encode(code, rho), [2, 5, 5], keep=[0])
    assert np.abs(total - reduced).max() < 1e-12


def test_decode_trivial_rotation_is_identity(rng):
    base = make_unitary_conjugation_code(np.eye(4)[:, [0, 3]], [np.diag([1, -1, 1, 1])], [0, 1], [0, 1, 1, 2])
    code = CovariantCode(base, (make_swp_state(4),))
    rho = random_density(rng, 2)
    rec = OutcomeRecord((0,), 0.25, 0.0, 0.0)
    state = ConditionedState(base.corrupt(0, base.encode(rho)), rec)
    assert np.abs(decode(code, 0, state) - rho).max() < 1e-14


@pytest.mark.parametrize("n_clocks", [1, 2])
def test_decoding_is_shift_covariant(n_clocks, rng):
    d = 6
    base = make_unitary_conjugation_code(np.eye(4)[:, [1, 2]], [np.diag([1, 1j, 1, 1])], [0, 1], [0, 1, 1, 2])
    clocks = tuple(make_quasi_ideal_state(d, 0.5, None, 2.0) for _ in range(n_clocks))
    code = CovariantCode(base, clocks)
    rho = random_density(rng, 2)
    k = np.array(rng.integers(0, d, n_clocks))
    ref = decode(code, 0, conditioned_state(code, rho, 0, k))
    for l in (1, 3, 5):
        shifted = conditioned_state(code, rho, 0, (k + l) % d)
        ka = choose_k_alpha(SINGLE_CLOCK, k, code) + l
        assert abs((shifted.record.k_alpha - ka) % d) < 1e-12 or abs((shifted.record.k_alpha - ka) % d - d) < 1e-12
        assert np.abs(decode(code, 0, shifted) - ref).max() < 1e-10


def test_large_clock_recovers_the_state(rng):
    d = 256
    code = CovariantCode(QUBIT, (make_quasi_ideal_state(d, 0, None, np.sqrt(d)),))
    rho = random_density(rng, 2)
    out = full_channel(code).apply(rho)
    assert 2 * trace_distance(out, rho) < 0.1


def test_large_clock_recovers_unitary_code(rng):
    base = make_unitary_conjugation_code(np.eye(4)[:, [1, 2]], [np.diag([1, 1, -1, 1]), np.diag([1j, 1, 1, 1])],
                                         [0, 1], [0, 1, 1, 2])
    code = CovariantCode(base, (make_quasi_ideal_state(128, 0, None, 3.0),))
    rho = random_density(rng, 2)
    for j in (0, 1):
        assert trace_distance(full_channel(code, j).apply(rho), rho) < 1e-2


def test_trivial_logical_generator_gives_identity_channel():
    code = CovariantCode(make_identity_code(2, [0, 0], [0, 0]), (make_swp_state(8),))
    assert np.abs(full_channel(code).choi - identity_choi(2)).max() < 1e-10


def channel_matrix():
    rng = np.random.default_rng(5)
    uni = make_unitary_conjugation_code(np.eye(4)[:, [1, 2]], [np.diag([1, 1, -1, 1])], [0, 1], [0, 1, 1, 2])
    qutrit = make_identity_code(3, [0, 1, 2], [0, 0, 1])
    cases = [
        ("qubit-swp", CovariantCode(QUBIT, (make_swp_state(8),)), SINGLE_CLOCK),
        ("qubit-qi-erased", CovariantCode(QUBIT, (make_quasi_ideal_state(7, 0, None, 2.0), random_clock(rng, 5)),
                                          erased={1}), SINGLE_CLOCK),
        ("unitary-pair", CovariantCode(uni, (make_quasi_ideal_state(5, 0.5, None, 2.0), random_clock(rng, 5))),
         SINGLE_CLOCK),
        ("qutrit", CovariantCode(qutrit, (make_quasi_ideal_state(6, 0, None, 2.0),)), SINGLE_CLOCK),
        ("triple-middle", CovariantCode(QUBIT, (make_quasi_ideal_state(6, 0, None, 2.0),) * 3), THREE_CLOCK_MIDDLE),
        ("triple-odd", CovariantCode(uni, (make_quasi_ideal_state(5, 0, None, 2.0), make_swp_state(5),
                                           random_clock(rng, 5))), THREE_CLOCK_MIDDLE),
    ]
    return cases


CHANNELS = channel_matrix()


@pytest.mark.parametrize("name,code,mode", CHANNELS, ids=[c[0] for c in CHANNELS])
def test_closed_form_channel_matches_outcome_loop(name, code, mode):
    fast = full_channel(code, 0, mode)
    slow = full_channel_by_outcomes(code, 0, mode)
    assert np.abs(fast.choi - slow.choi).max() < 1e-12
    assert fast.tp_deviation() < 1e-9
    assert fast.min_eigenvalue() > -1e-8


def test_choi_distance_tracks_infidelity():
    from covclock.fidelity import f_worst_direct

    code = CovariantCode(QUBIT, (make_swp_state(8),))
    ch = full_channel(code)
    diff = (ch.choi - identity_choi(2)) / 2
    proxy = 0.5 * np.abs(np.linalg.eigvalsh(diff)).sum()
    infid = 1 - f_worst_direct(ch)[0]
    assert infid / 4 <= proxy <= 4 * infid


@pytest.mark.parametrize("dc,L", [(3, 2), (5, 2)])
def test_tensor_readout_matches_effective_clock(dc, L):
    block = embed_L(dc, L, "quasi_ideal", sigma=1.5)
    code = CovariantCode(QUBIT, (block,))
    ten = f_tables(code, [-1, 0, 1], [tensor_readout(block)])
    eff = f_tables(code, [-1, 0, 1])
    for Q in (-1, 0, 1):
        assert np.abs(ten[Q] - eff[Q]).max() < 1e-12
        assert np.abs(f_table_quadrature(code, Q, [tensor_readout(block)]) - eff[Q]).max() < 1e-12


def pw_code(d):
    return CovariantCode(make_identity_code(2, [0, 0], [0, 1]), (make_quasi_ideal_state(d, 0, None, np.sqrt(d)),))


def test_page_wootters_examples():
    plus = np.full((2, 2), 0.5)
    assert page_wootters_condition(pw_code(64), plus, 0.0) < 0.1
    code = pw_code(16)
    for tau in (0.3, 2.0):
        a = page_wootters_condition(code, plus, tau)
        b = page_wootters_condition(code, plus, tau + 2 * np.pi)
        assert abs(a - b) < 1e-10
    assert stationarity_residual(code, plus) < 1e-10


def test_page_wootters_needs_trivial_logical_generator():
    code = CovariantCode(make_identity_code(2, [0, 1], [0, 1]), (make_swp_state(4),))
    with pytest.raises(ValueError):
        page_wootters_condition(code, np.eye(2) / 2, 0.0)


def test_channel_check_raises_on_broken_channel():
    from covclock.pipeline import ChannelLawError, ChannelMatrix

    bad = ChannelMatrix(np.diag([1.0, -0.5, 0.0, 1.0]).astype(complex), 2, 2)
    with pytest.raises(ChannelLawError):
        bad.check()


def test_more_than_three_clocks_rejected():
    code = CovariantCode(QUBIT, (make_swp_state(3),) * 4)
    with pytest.raises(ValueError):
        f_tables(code, [0])
