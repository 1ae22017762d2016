"""Base error-correcting codes and their covariant encodings.

A base code is an isometric encoder ``V`` from a logical space into a
physical space together with a list of error channels and matching
decoders, one decoder per error. Both spaces carry an integer-spectrum
U(1) generator. Combining the encoder with clock reference frames and
averaging over the group yields a covariant encoder.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .channels import apply_kraus, kraus_completeness_deviation
from .clock import ClockState, Generator, clock_generator

__all__ = [
    "BaseCode",
    "CovariantCode",
    "make_identity_code",
    "make_unitary_conjugation_code",
    "covariant_encode",
    "covariant_encode_choi",
    "covariant_encode_quadrature",
    "check_transversal_compat",
    "code_from_dict",
    "code_to_dict",
    "validate_density_matrix",
]


def _as_kraus(ops):
    return tuple(np.asarray(K, dtype=np.complex128) for K in ops)


@dataclass(frozen=True)
class BaseCode:
    """Encoder isometry plus paired error and recovery channels.

    ``errors[j]`` and ``decoders[j]`` are Kraus lists; ``decoders[j]`` undoes
    ``errors[j]`` on the code space.
    """

    encoder: np.ndarray
    errors: tuple
    decoders: tuple
    gen_L: Generator
    gen_Co: Generator
    labels: tuple = ()

    def __post_init__(self):
        V = np.asarray(self.encoder, dtype=np.complex128)
        object.__setattr__(self, "encoder", V)
        object.__setattr__(self, "errors", tuple(_as_kraus(e) for e in self.errors))
        object.__setattr__(self, "decoders", tuple(_as_kraus(D) for D in self.decoders))
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{j}" for j in range(len(self.errors))))
        d_P, d_L = V.shape
        if np.abs(V.conj().T @ V - np.eye(d_L)).max() > 1e-12:
            raise ValueError("encoder is not an isometry")
        if self.gen_L.dim != d_L or self.gen_Co.dim != d_P:
            raise ValueError("generator dimensions do not match the encoder")
        if self.gen_L.omega != self.gen_Co.omega:
            raise ValueError("logical and physical generators must share omega")
        if len(self.errors) != len(self.decoders) or not self.errors:
            raise ValueError("need one decoder per error channel")
        for E, D in zip(self.errors, self.decoders):
            if any(K.shape != (d_P, d_P) for K in E):
                raise ValueError("error Kraus operators must act on the physical space")
            if any(K.shape != (d_L, d_P) for K in D):
                raise ValueError("decoder Kraus operators must map physical to logical")
            if kraus_completeness_deviation(E) > 1e-12 or kraus_completeness_deviation(D) > 1e-12:
                raise ValueError("Kraus set is not trace preserving")
        dev = self.recovery_deviation()
        if dev > 1e-10:
            raise ValueError(f"decoders do not undo the errors (deviation {dev:.3g})")

    @property
    def d_L(self) -> int:
        return self.encoder.shape[1]

    @property
    def d_P(self) -> int:
        return self.encoder.shape[0]

    @property
    def omega(self) -> float:
        return self.gen_L.omega

    def encode(self, rho):
        return self.encoder @ rho @ self.encoder.conj().T

    def corrupt(self, j, rho_P):
        return apply_kraus(self.errors[j], rho_P)

    def recover(self, j, rho_P):
        return apply_kraus(self.decoders[j], rho_P)

    def recovery_deviation(self) -> float:
        """Worst entry error of ``D_j(E_j(V X V^dag)) - X`` over matrix units."""
        worst = 0.0
        for j in range(len(self.errors)):
            for a in range(self.d_L):
                for b in range(self.d_L):
                    X = np.zeros((self.d_L, self.d_L), dtype=np.complex128)
                    X[a, b] = 1
                    out = self.recover(j, self.corrupt(j, self.encode(X)))
                    worst = max(worst, float(np.abs(out - X).max()))
        return worst

    def charge_range(self) -> int:
        """Largest ``|Q|`` over ``h_Co,q - h_Co,q' + h_L,n - h_L,n'``."""
        return self.gen_L.delta_h + self.gen_Co.delta_h


def make_identity_code(d: int, levels_L, levels_Co, omega: float = 1.0) -> BaseCode:
    """Trivial code: no encoding, no error, no correction."""
    if d < 2:
        raise ValueError(f"code dimension must be >= 2, got {d}")
    if len(levels_L) != d or len(levels_Co) != d:
        raise ValueError("level lists must have length d")
    eye = np.eye(d, dtype=np.complex128)
    return BaseCode(eye, ((eye,),), ((eye,),), Generator(levels_L, omega),
                    Generator(levels_Co, omega), ("identity",))


def make_unitary_conjugation_code(V, noise, levels_L, levels_Co, omega: float = 1.0) -> BaseCode:
    """Code whose known errors are unitaries ``U_j`` on the physical space.

    The decoder for ``U_j`` is ``X -> V^dag U_j^dag X U_j V`` on the rotated
    code space, completed to a trace-preserving map by sending the
    orthogonal complement to the logical state ``|0>``.
    """
    V = np.asarray(V, dtype=np.complex128)
    d_P, d_L = V.shape
    if np.abs(V.conj().T @ V - np.eye(d_L)).max() > 1e-12:
        raise ValueError("V is not an isometry")
    errors, decoders = [], []
    for U in noise:
        U = np.asarray(U, dtype=np.complex128)
        if U.shape != (d_P, d_P) or np.abs(U.conj().T @ U - np.eye(d_P)).max() > 1e-12:
            raise ValueError("noise operators must be unitaries on the physical space")
        W = U @ V
        complement = np.linalg.svd(np.eye(d_P) - W @ W.conj().T)[0][:, : d_P - d_L]
        kraus = [W.conj().T]
        for i in range(d_P - d_L):
            K = np.zeros((d_L, d_P), dtype=np.complex128)
            K[0] = complement[:, i].conj()
            kraus.append(K)
        errors.append((U,))
        decoders.append(tuple(kraus))
    return BaseCode(V, tuple(errors), tuple(decoders), Generator(levels_L, omega),
                    Generator(levels_Co, omega))


@dataclass(frozen=True)
class CovariantCode:
    """A base code equipped with clock reference frames.

    ``erased`` lists indices of clocks lost at known locations; they are
    traced out before the readout.
    """

    base: BaseCode
    clocks: tuple
    erased: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        clocks = tuple(self.clocks)
        if not clocks or not all(isinstance(c, ClockState) for c in clocks):
            raise ValueError("need at least one ClockState")
        object.__setattr__(self, "clocks", clocks)
        object.__setattr__(self, "erased", frozenset(self.erased))
        if not self.erased <= set(range(len(clocks))):
            raise ValueError("erased indices out of range")
        if len(self.erased) == len(clocks):
            raise ValueError("at least one clock must survive")

    @property
    def surviving(self) -> tuple:
        return tuple(i for i in range(len(self.clocks)) if i not in self.erased)

    @property
    def surviving_clocks(self) -> tuple:
        return tuple(self.clocks[i] for i in self.surviving)

    @property
    def d(self) -> int:
        """Dimension shared by the surviving (effective) clocks."""
        dims = {c.dim for c in self.surviving_clocks}
        if len(dims) != 1:
            raise ValueError("surviving clocks must share one dimension to be read out together")
        return dims.pop()

    def clock_generator(self) -> Generator:
        return clock_generator(self.d, self.base.omega)


def validate_density_matrix(rho, d):
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} density matrix, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-9:
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho) - 1) > 1e-10:
        raise ValueError("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -1e-9:
        raise ValueError("density matrix must be positive semidefinite")
    return rho


def _joint_energies(code: CovariantCode) -> np.ndarray:
    e = code.base.gen_Co.array
    for c in code.clocks:
        e = (e[:, None] + np.arange(c.dim)[None, :]).reshape(-1)
    return e


def _twirl(code: CovariantCode, X) -> np.ndarray:
    base = code.base
    clock_rho = np.ones((1, 1), dtype=np.complex128)
    for c in code.clocks:
        clock_rho = np.kron(clock_rho, c.density)
    e = _joint_energies(code)
    gap = e[:, None] - e[None, :]
    hL = base.gen_L.array
    V = base.encoder
    out = np.zeros(gap.shape, dtype=np.complex128)
    for n1 in range(base.d_L):
        for n in range(base.d_L):
            if X[n1, n] == 0:
                continue
            block = np.kron(np.outer(V[:, n1], V[:, n].conj()), clock_rho)
            mask = gap + hL[n] - hL[n1] == 0
            out += X[n1, n] * np.where(mask, block, 0)
    return out


def covariant_encode(code: CovariantCode, rho_L) -> np.ndarray:
    """Group-averaged encoding onto the physical system and all clocks.

    The average over one period keeps exactly those matrix elements whose
    energy difference cancels the logical one, so it is evaluated as a
    Kronecker-delta mask on the product ``E(rho) (x) clocks``.
    The output ordering is physical factor first, then clocks in order.
    """
    return _twirl(code, validate_density_matrix(rho_L, code.base.d_L))


def covariant_encode_choi(code: CovariantCode) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) E_cov(|i><j|)`` of the covariant encoder."""
    d = code.base.d_L
    blocks = [[_twirl(code, np.eye(d)[:, [i]] @ np.eye(d)[[j], :]) for j in range(d)] for i in range(d)]
    return np.block(blocks)


def covariant_encode_quadrature(code: CovariantCode, rho_L, grid: int | None = None) -> np.ndarray:
    """Reference implementation averaging ``E_t (x) U_C(t) rho_C U_C(t)^dag``.

    Uses a uniform grid over one period, exact once it exceeds twice the
    largest frequency present.
    """
    base = code.base
    rho_L = validate_density_matrix(rho_L, base.d_L)
    span = base.charge_range() + sum(c.dim - 1 for c in code.clocks)
    grid = 2 * span + 1 if grid is None else grid
    if grid <= 2 * span:
        raise ValueError(f"grid of {grid} points cannot resolve frequency {span}")
    T = 2 * np.pi / base.omega
    acc = 0
    for t in np.arange(grid) * T / grid:
        UL = base.gen_L.unitary(t)
        phys = base.gen_Co.unitary(t) @ base.encode(UL.conj().T @ rho_L @ UL) @ base.gen_Co.unitary(t).conj().T
        for c in code.clocks:
            psi = c.generator(base.omega).phases(t) * c.amplitudes
            phys = np.kron(phys, np.outer(psi, psi.conj()))
        acc = acc + phys
    return acc / grid


def check_transversal_compat(code: BaseCode, V_L, V_Co, tol: float = 1e-10) -> bool:
    """Whether ``V_L`` and ``V_Co`` commute with the logical and physical generators.

    When both commute, the covariant encoding inherits the transversal pair.
    """
    HL = np.diag(code.gen_L.array).astype(float)
    HCo = np.diag(code.gen_Co.array).astype(float)
    V_L = np.asarray(V_L)
    V_Co = np.asarray(V_Co)
    return bool(np.linalg.norm(V_L @ HL - HL @ V_L) < tol
                and np.linalg.norm(V_Co @ HCo - HCo @ V_Co) < tol)


def _mat_to_json(M):
    M = np.asarray(M, dtype=np.complex128)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def _mat_from_json(obj):
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj.get("im", 0.0), dtype=float)
    return np.asarray(obj, dtype=np.complex128)


def code_to_dict(code: BaseCode) -> dict:
    return {
        "encoder": _mat_to_json(code.encoder),
        "errors": [[_mat_to_json(K) for K in E] for E in code.errors],
        "decoders": [[_mat_to_json(K) for K in D] for D in code.decoders],
        "levels_L": list(code.gen_L.levels),
        "levels_Co": list(code.gen_Co.levels),
        "omega": code.omega,
        "labels": list(code.labels),
    }


def code_from_dict(obj: dict) -> BaseCode:
    """Rebuild a code from nested ``{"re": ..., "im": ...}`` matrices."""
    omega = float(obj.get("omega", 1.0))
    return BaseCode(
        _mat_from_json(obj["encoder"]),
        tuple(tuple(_mat_from_json(K) for K in E) for E in obj["errors"]),
        tuple(tuple(_mat_from_json(K) for K in D) for D in obj["decoders"]),
        Generator(obj["levels_L"], omega),
        Generator(obj["levels_Co"], omega),
        tuple(obj.get("labels", ())),
    )
