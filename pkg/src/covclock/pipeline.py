"""Clock readout, phase estimation, decoding and the averaged logical channel.

After the covariant encoding, an error on the physical system and the loss of
some clocks, the surviving clocks are measured in the time basis. Each
outcome vector ``k`` yields an estimate ``k_alpha`` of the group element, and
the decoder undoes that rotation. Averaging over outcomes gives the channel
``K`` on the logical space.

Everything about the clocks enters through the functions

    F_Q(k) = (1/T0) int_0^T0 dt exp(-i omega Q t) prod_i |<theta_{k_i}|psi_i(t)>|^2,

evaluated here exactly as sums over energy differences. ``F_0(k)`` is the
probability of outcome ``k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .channels import (
    choi_to_kraus,
    kraus_superop,
    min_eigenvalue,
    superop_to_choi,
    tp_deviation,
    trace_distance,
)
from .clock import ClockState, materialize_block, time_basis_matrix
from .codes import CovariantCode, covariant_encode, validate_density_matrix

__all__ = [
    "SINGLE_CLOCK",
    "THREE_CLOCK_MIDDLE",
    "Readout",
    "OutcomeRecord",
    "ConditionedState",
    "ChannelMatrix",
    "clock_readout",
    "tensor_readout",
    "F_Q",
    "f_tables",
    "f_table_quadrature",
    "quadrature_grid_size",
    "shift_covariance_check",
    "choose_k_alpha",
    "k_alpha_table",
    "p_ratio",
    "outcome_records",
    "conditioned_state",
    "decode",
    "full_channel",
    "full_channel_by_outcomes",
    "page_wootters_condition",
    "stationarity_residual",
]

SINGLE_CLOCK = "single_clock"
THREE_CLOCK_MIDDLE = "three_clock_middle"
MAX_CLOCKS = 3
DEGENERATE_PROB = 1e-15


@dataclass(frozen=True)
class Readout:
    """A clock as seen by the time-basis measurement.

    Attributes
    ----------
    levels : np.ndarray
        Integer energy of each basis vector of the clock space.
    amplitudes : np.ndarray
        Clock state in that basis.
    basis : np.ndarray
        Column ``k`` is the measurement vector for outcome ``k``.
    """

    levels: np.ndarray
    amplitudes: np.ndarray
    basis: np.ndarray

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    @cached_property
    def binned(self) -> np.ndarray:
        """``B[k, E] = sum_{r: h_r = E} conj(mu_k[r]) psi[r]``."""
        lv = np.asarray(self.levels, dtype=np.int64)
        out = np.zeros((self.d, lv.max() + 1), dtype=np.complex128)
        contrib = self.basis.conj().T * self.amplitudes[None, :]
        for r, e in enumerate(lv):
            out[:, e] += contrib[:, r]
        return out

    @cached_property
    def lags(self) -> np.ndarray:
        """``g[k, m + n_E - 1] = sum_E B[k, E] conj(B[k, E - m])``."""
        B = self.binned
        n = B.shape[1]
        g = np.zeros((self.d, 2 * n - 1), dtype=np.complex128)
        for m in range(-(n - 1), n):
            if m >= 0:
                g[:, m + n - 1] = (B[:, m:] * B[:, : n - m].conj()).sum(axis=1)
            else:
                g[:, m + n - 1] = (B[:, : n + m] * B[:, -m:].conj()).sum(axis=1)
        return g

    def probabilities(self, times, omega=1.0) -> np.ndarray:
        """``|<mu_k|psi(t)>|^2`` on a set of times, shape ``(len(times), d)``."""
        psi_t = np.exp(-1j * omega * np.outer(times, self.levels)) * self.amplitudes
        return np.abs(psi_t @ self.basis.conj()) ** 2


def clock_readout(state: ClockState) -> Readout:
    return Readout(np.arange(state.dim), state.amplitudes, time_basis_matrix(state.dim))


def tensor_readout(state: ClockState) -> Readout:
    """Readout of an embedded block realised on all of its sites."""
    levels, W = materialize_block(state)
    return Readout(levels, W @ state.amplitudes, W @ time_basis_matrix(state.dim))


def _readouts(code: CovariantCode, readouts=None):
    if readouts is None:
        readouts = [clock_readout(c) for c in code.surviving_clocks]
    if len(readouts) > MAX_CLOCKS:
        raise ValueError(f"at most {MAX_CLOCKS} surviving clocks are supported")
    return list(readouts)


def F_Q(code: CovariantCode, Q: int, k_vec, readouts=None) -> complex:
    """``F_Q`` at one outcome vector, by convolving per-clock lag sums."""
    rs = _readouts(code, readouts)
    k_vec = np.atleast_1d(k_vec)
    if len(k_vec) != len(rs):
        raise ValueError(f"expected {len(rs)} outcomes, got {len(k_vec)}")
    conv = np.ones(1, dtype=np.complex128)
    for r, k in zip(rs, k_vec):
        conv = np.convolve(conv, r.lags[int(k) % r.d])
    centre = (conv.size - 1) // 2
    idx = centre - int(Q)
    if idx < 0 or idx >= conv.size:
        return 0j
    return complex(conv[idx])


def _tables(lags, Qs):
    g = lags[0]
    half = (g.shape[1] - 1) // 2
    if len(lags) == 1:
        out = {}
        for Q in Qs:
            j = half - Q
            out[Q] = g[:, j].copy() if 0 <= j < g.shape[1] else np.zeros(g.shape[0], complex)
        return out
    ms = np.arange(-half, half + 1)
    inner = sorted({Q + m for Q in Qs for m in ms})
    rest = _tables(lags[1:], inner)
    out = {}
    for Q in Qs:
        stack = np.stack([rest[Q + m] for m in ms])
        out[Q] = np.tensordot(g, stack, axes=(1, 0))
    return out


def f_tables(code: CovariantCode, Qs, readouts=None) -> dict:
    """``F_Q`` on every outcome vector, for each requested ``Q``.

    Returns a dict mapping ``Q`` to an array of shape ``(d,) * N`` indexed
    by the surviving clocks' outcomes.
    """
    rs = _readouts(code, readouts)
    return _tables([r.lags for r in rs], [int(Q) for Q in Qs])


def quadrature_grid_size(n_clocks: int, d: int, q_max: int) -> int:
    """Smallest power of two above ``2*(n_clocks*(d-1) + q_max) + 1``."""
    need = 2 * (n_clocks * (d - 1) + abs(q_max)) + 1
    return 1 << int(np.ceil(np.log2(need)))


def f_table_quadrature(code: CovariantCode, Q: int, readouts=None, grid: int | None = None) -> np.ndarray:
    """``F_Q`` table by averaging over a uniform time grid.

    Independent of the lag-sum path; exact because the integrand is a
    trigonometric polynomial of bounded degree.
    """
    rs = _readouts(code, readouts)
    top = sum(int(np.max(r.levels)) for r in rs) + abs(Q)
    if grid is None:
        grid = 1 << int(np.ceil(np.log2(2 * top + 1)))
    if grid <= top:
        raise ValueError(f"grid of {grid} points does not integrate frequency {top} exactly")
    omega = code.base.omega
    ts = np.arange(grid) * (2 * np.pi / omega) / grid
    weight = np.exp(-1j * omega * Q * ts)
    letters = "abc"[: len(rs)]
    probs = [r.probabilities(ts, omega) for r in rs]
    spec = ",".join(f"t{c}" for c in letters) + ",t->" + letters
    return np.einsum(spec, *probs, weight, optimize=True) / grid


def shift_covariance_check(code: CovariantCode, Q: int, k_vec, l: int, readouts=None) -> float:
    """``|F_Q(k) - exp(2 pi i l Q / d) F_Q(k + l)|`` with ``l`` added to every entry."""
    d = code.d
    k_vec = np.atleast_1d(k_vec)
    a = F_Q(code, Q, k_vec, readouts)
    b = F_Q(code, Q, (k_vec + l) % d, readouts)
    return float(abs(a - np.exp(2j * np.pi * l * Q / d) * b))


KAlphaPolicy = Callable[[np.ndarray, CovariantCode], np.ndarray]


def _k_alpha_rows(mode, ks: np.ndarray, code: CovariantCode) -> np.ndarray:
    d = code.d
    clocks = code.surviving_clocks
    if callable(mode):
        return np.mod(np.asarray(mode(ks, code), dtype=float), d)
    if mode == SINGLE_CLOCK:
        return np.mod(ks[:, 0] - clocks[0].k0, d)
    if mode == THREE_CLOCK_MIDDLE:
        if ks.shape[1] != 3:
            raise ValueError("the middle-angle rule needs exactly three clocks")
        from .phase3 import k_alpha_middle

        centres = np.array([c.k0 for c in clocks])
        return k_alpha_middle(ks, centres, d)
    raise ValueError(f"unknown k_alpha mode {mode!r}")


def choose_k_alpha(mode, k_vec, code: CovariantCode) -> float:
    """Phase estimate (a real number mod ``d``) from one outcome vector.

    ``mode`` is ``SINGLE_CLOCK`` (``k_1 - k_1^0``), ``THREE_CLOCK_MIDDLE``
    (circular median of three clocks) or a callable policy taking an
    ``(n, N)`` integer array of outcomes and the code.
    """
    ks = np.atleast_2d(np.asarray(k_vec, dtype=np.int64))
    if ks.shape[1] != len(code.surviving):
        raise ValueError("outcome vector length must match the surviving clocks")
    return float(_k_alpha_rows(mode, ks, code)[0])


def _all_outcomes(N, d):
    grids = np.indices((d,) * N).reshape(N, -1).T
    return grids


def k_alpha_table(code: CovariantCode, mode=SINGLE_CLOCK) -> np.ndarray:
    N, d = len(code.surviving), code.d
    return _k_alpha_rows(mode, _all_outcomes(N, d), code).reshape((d,) * N)


def p_ratio(code: CovariantCode, Q: int, k_vec, k_alpha: float, readouts=None) -> complex:
    """``1 - F_Q(k)/F_0(k) * exp(2 pi i k_alpha Q / d)``."""
    F0 = F_Q(code, 0, k_vec, readouts).real
    if F0 <= DEGENERATE_PROB:
        raise ValueError(f"outcome {tuple(np.atleast_1d(k_vec))} has no support")
    return 1 - F_Q(code, Q, k_vec, readouts) / F0 * np.exp(2j * np.pi * k_alpha * Q / code.d)


@dataclass(frozen=True)
class OutcomeRecord:
    k_vec: tuple
    prob: float
    k_alpha: float
    t_alpha: float


def outcome_records(code: CovariantCode, mode=SINGLE_CLOCK, readouts=None) -> list:
    """Every outcome vector in lexicographic order with its probability and phase."""
    N, d = len(code.surviving), code.d
    F0 = f_tables(code, [0], readouts)[0].real.reshape(-1)
    ks = _all_outcomes(N, d)
    ka = _k_alpha_rows(mode, ks, code)
    T0 = 2 * np.pi / code.base.omega
    return [OutcomeRecord(tuple(int(x) for x in k), float(p), float(a), float(a * T0 / d))
            for k, p, a in zip(ks, F0, ka)]


@dataclass(frozen=True)
class ConditionedState:
    rho: np.ndarray
    record: OutcomeRecord


def _q_index(code: CovariantCode):
    """``Q[q, q', n', n] = h_Co,q - h_Co,q' + h_L,n - h_L,n'``."""
    hC = code.base.gen_Co.array
    hL = code.base.gen_L.array
    dCo = hC[:, None] - hC[None, :]
    dL = hL[None, :] - hL[:, None]  # indexed [n', n]
    return dCo[:, :, None, None] + dL[None, None, :, :]


def _error_images(code: CovariantCode, j: int) -> np.ndarray:
    """``Y[n', n] = E_j(V |n'><n| V^dag)`` as an array ``(d_L, d_L, d_P, d_P)``."""
    base = code.base
    Y = np.zeros((base.d_L, base.d_L, base.d_P, base.d_P), dtype=np.complex128)
    for n1 in range(base.d_L):
        for n in range(base.d_L):
            X = np.zeros((base.d_L, base.d_L), dtype=np.complex128)
            X[n1, n] = 1
            Y[n1, n] = base.corrupt(j, base.encode(X))
    return Y


def _conditioned_operator(code, X, j, k_vec, readouts=None):
    R = code.base.charge_range()
    F = {Q: F_Q(code, Q, k_vec, readouts) for Q in range(-R, R + 1)}
    F0 = F[0].real
    if F0 <= DEGENERATE_PROB:
        raise ValueError(f"outcome {tuple(np.atleast_1d(k_vec))} has no support")
    Qidx = _q_index(code)
    Y = _error_images(code, j)
    ratio = np.vectorize(lambda q: F[int(q)])(Qidx) / F0
    return np.einsum("mn,mnab,abmn->ab", X, Y, ratio), F0


def conditioned_state(code: CovariantCode, rho_L, j: int, k_vec, mode=SINGLE_CLOCK,
                      readouts=None) -> ConditionedState:
    """Physical state after error ``j`` and clock outcome ``k_vec``.

    The error acts in the co-rotating frame of the physical system, so the
    outcome only reweights each matrix element by ``F_Q / F_0``.
    """
    rho_L = validate_density_matrix(rho_L, code.base.d_L)
    rho, F0 = _conditioned_operator(code, rho_L, j, k_vec, readouts)
    ka = choose_k_alpha(mode, k_vec, code)
    T0 = 2 * np.pi / code.base.omega
    rec = OutcomeRecord(tuple(int(x) for x in np.atleast_1d(k_vec)), float(F0), ka, ka * T0 / code.d)
    return ConditionedState(rho, rec)


def _decode_operator(code, j, X, t_alpha):
    base = code.base
    UCo = base.gen_Co.unitary(t_alpha)
    UL = base.gen_L.unitary(t_alpha)
    return UL @ base.recover(j, UCo.conj().T @ X @ UCo) @ UL.conj().T


def decode(code: CovariantCode, j: int, state: ConditionedState) -> np.ndarray:
    """Undo the estimated rotation and the error.

    Applies ``U_L(t_a) D_j(U_Co(t_a)^dag (.) U_Co(t_a)) U_L(t_a)^dag`` with
    ``t_a = k_alpha T0 / d`` taken from the outcome record.
    """
    return _decode_operator(code, j, state.rho, state.record.t_alpha)


@dataclass
class ChannelMatrix:
    """Logical channel stored by its Choi matrix (input factor first)."""

    choi: np.ndarray
    d_in: int
    d_out: int
    meta: dict = field(default_factory=dict)

    @cached_property
    def kraus(self) -> list:
        return choi_to_kraus(self.choi, self.d_in, self.d_out)

    def apply(self, rho) -> np.ndarray:
        J = self.choi.reshape(self.d_in, self.d_out, self.d_in, self.d_out)
        return np.einsum("iajb,ij->ab", J, rho)

    def tp_deviation(self) -> float:
        return tp_deviation(self.choi, self.d_in, self.d_out)

    def min_eigenvalue(self) -> float:
        return min_eigenvalue(self.choi)

    def check(self, tp_tol=1e-9, cp_tol=-1e-8):
        """Raise if the channel violates trace preservation or positivity."""
        tp, ev = self.tp_deviation(), self.min_eigenvalue()
        if tp > tp_tol or ev < cp_tol:
            raise ChannelLawError(
                f"channel laws violated: tp deviation {tp:.3g}, min eigenvalue {ev:.3g}", self.meta)
        return self


class ChannelLawError(RuntimeError):
    def __init__(self, message, meta=None):
        super().__init__(message)
        self.meta = meta or {}


def _phase_weights(code, tables, ka, R):
    """``G[s, Q] = sum_k exp(2 pi i k_alpha(k) s / d) F_Q(k)``."""
    d = code.d
    s = np.arange(-R, R + 1)
    phase = np.exp(2j * np.pi * np.outer(s, ka.reshape(-1)) / d)
    Fmat = np.stack([tables[Q].reshape(-1) for Q in range(-R, R + 1)], axis=1)
    return phase @ Fmat


def full_channel(code: CovariantCode, j: int = 0, mode=SINGLE_CLOCK, readouts=None,
                 tables=None) -> ChannelMatrix:
    """Outcome-averaged logical channel, assembled in closed form.

    Uses the fact that every outcome contributes through the scalar
    ``F_Q(k) exp(2 pi i k_alpha s / d)``, so the sum over outcomes can be
    done once per ``(s, Q)`` pair.
    """
    base = code.base
    R = base.charge_range()
    if tables is None:
        tables = f_tables(code, range(-R, R + 1), readouts)
    ka = k_alpha_table(code, mode)
    G = _phase_weights(code, tables, ka, R)
    hC, hL = base.gen_Co.array, base.gen_L.array
    dCo = hC[:, None] - hC[None, :]
    dL = hL[:, None] - hL[None, :]
    sidx = dCo[None, None, :, :] - dL[:, :, None, None] + R  # [a, b, q, q']
    qidx = _q_index(code) + R  # [q, q', n', n]
    Gsel = G[sidx[:, :, :, :, None, None], qidx[None, None, :, :, :, :]]
    D = kraus_superop(base.decoders[j]).reshape(base.d_L, base.d_L, base.d_P, base.d_P)
    Y = _error_images(code, j)
    S = np.einsum("abqr,mnqr,abqrmn->abmn", D, Y, Gsel)
    choi = S.transpose(2, 0, 3, 1).reshape(base.d_L**2, base.d_L**2)
    return ChannelMatrix(choi, base.d_L, base.d_L, {"j": j, "mode": str(mode), "d": code.d})


def full_channel_by_outcomes(code: CovariantCode, j: int = 0, mode=SINGLE_CLOCK,
                             readouts=None) -> ChannelMatrix:
    """Reference assembly: condition, decode and average outcome by outcome."""
    base = code.base
    dL = base.d_L
    S = np.zeros((dL * dL, dL * dL), dtype=np.complex128)
    for rec in outcome_records(code, mode, readouts):
        if rec.prob <= DEGENERATE_PROB:
            continue
        for n1 in range(dL):
            for n in range(dL):
                X = np.zeros((dL, dL), dtype=np.complex128)
                X[n1, n] = 1
                rho, F0 = _conditioned_operator(code, X, j, rec.k_vec, readouts)
                out = _decode_operator(code, j, rho, rec.t_alpha)
                S[:, n1 * dL + n] += F0 * out.reshape(-1)
    return ChannelMatrix(superop_to_choi(S, dL, dL), dL, dL, {"j": j, "mode": str(mode), "d": code.d})


def _clock_projector(code: CovariantCode, tau: float) -> np.ndarray:
    P = np.ones((1, 1), dtype=np.complex128)
    for c in code.clocks:
        psi = c.generator(code.base.omega).phases(tau) * c.amplitudes
        P = np.kron(P, np.outer(psi, psi.conj()))
    return P


def page_wootters_condition(code: CovariantCode, rho_L, tau: float) -> float:
    """Trace distance between the clock-conditioned state and the ideal evolution.

    Projects every clock onto its own state evolved to time ``tau``, traces
    the clocks out, normalises, and compares with
    ``exp(-i tau H_Co) E(rho) exp(i tau H_Co)``. Requires a trivial logical
    representation.
    """
    base = code.base
    if not base.gen_L.is_trivial():
        raise ValueError("conditioning needs a trivial logical representation")
    enc = covariant_encode(code, rho_L)
    dc = enc.shape[0] // base.d_P
    P = _clock_projector(code, tau)
    proj = np.kron(np.eye(base.d_P), P)
    cond = (proj @ enc @ proj).reshape(base.d_P, dc, base.d_P, dc)
    cond = np.einsum("aibi->ab", cond)
    cond /= np.trace(cond).real
    U = base.gen_Co.unitary(tau)
    target = U @ base.encode(validate_density_matrix(rho_L, base.d_L)) @ U.conj().T
    return trace_distance(cond, target)


def stationarity_residual(code: CovariantCode, rho_L) -> float:
    """Frobenius norm of the commutator of the total Hamiltonian with the encoding."""
    enc = covariant_encode(code, rho_L)
    from .codes import _joint_energies

    e = _joint_energies(code).astype(float)
    return float(np.linalg.norm(e[:, None] * enc - enc * e[None, :]))
