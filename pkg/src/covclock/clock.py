"""Finite-dimensional clock states, their dynamics and the time basis.

A clock of dimension ``d`` carries the Hamiltonian ``omega * diag(0, 1, ..., d-1)``.
Its time basis is the discrete Fourier transform of the energy basis, and
evolving by ``T0/d`` moves a time-basis state one tick forward.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "ClockState",
    "Generator",
    "clock_generator",
    "time_basis_matrix",
    "make_time_basis_state",
    "make_swp_state",
    "make_quasi_ideal_state",
    "make_custom_state",
    "evolve",
    "embed_L",
    "block_dimension",
    "materialize_block",
    "is_t_incoherent",
    "time_basis_overlaps",
]

NORM_TOL = 1e-12


@dataclass(frozen=True)
class Generator:
    """Integer energy levels ``h_n`` with a common angular frequency.

    The represented unitary is ``U(t) = exp(-i t omega diag(levels))``.
    """

    levels: tuple
    omega: float = 1.0

    def __post_init__(self):
        lv = np.asarray(self.levels)
        if lv.ndim != 1 or lv.size == 0:
            raise ValueError("levels must be a non-empty 1d sequence")
        if not np.all(np.isfinite(lv)) or np.any(np.round(lv) != lv):
            raise ValueError(f"levels must be finite integers, got {self.levels}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        object.__setattr__(self, "levels", tuple(int(x) for x in lv))

    @property
    def dim(self) -> int:
        return len(self.levels)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.levels, dtype=np.int64)

    @property
    def delta_h(self) -> int:
        """Spread of the spectrum in units of ``omega``."""
        return max(self.levels) - min(self.levels)

    @property
    def period(self) -> float:
        return 2 * np.pi / self.omega

    def unitary(self, t: float) -> np.ndarray:
        return np.diag(self.phases(t))

    def phases(self, t: float) -> np.ndarray:
        return np.exp(-1j * self.omega * t * self.array)

    def is_trivial(self) -> bool:
        return self.delta_h == 0


def clock_generator(d: int, omega: float = 1.0) -> Generator:
    """Non-degenerate clock Hamiltonian with levels ``0..d-1``."""
    if d < 1:
        raise ValueError(f"invalid dimension {d}")
    return Generator(tuple(range(d)), omega)


@dataclass(frozen=True)
class ClockState:
    """Pure clock state stored by its amplitudes in the energy basis.

    Attributes
    ----------
    dim : int
        Dimension of the (effective) clock space.
    amplitudes : np.ndarray
        Complex unit vector of length ``dim``.
    kind : str
        One of ``"swp"``, ``"quasi_ideal"`` or ``"custom"``.
    params : dict
        Construction parameters. ``k0`` (the time-basis centre used by the
        decoder) is always present. Quasi-ideal states also carry ``n0`` and
        ``sigma``.
    per_site_dim : int
        Dimension of one site. Equal to ``dim`` unless ``embed_factor > 1``.
    embed_factor : int
        Number of entangled sites represented by this effective clock.
    """

    dim: int
    amplitudes: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    per_site_dim: int = 0
    embed_factor: int = 1

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.shape != (self.dim,):
            raise ValueError(f"amplitudes shape {amp.shape} does not match dim {self.dim}")
        if abs(np.linalg.norm(amp) - 1) > NORM_TOL:
            raise ValueError("clock amplitudes must be normalised")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        if self.per_site_dim == 0:
            object.__setattr__(self, "per_site_dim", self.dim)
        if self.embed_factor < 1:
            raise ValueError("embed_factor must be >= 1")
        if self.dim != block_dimension(self.per_site_dim, self.embed_factor):
            raise ValueError("dim inconsistent with per_site_dim and embed_factor")
        params = dict(self.params)
        params.setdefault("k0", 0.0)
        object.__setattr__(self, "params", params)

    @property
    def k0(self) -> float:
        return float(self.params["k0"])

    @property
    def density(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def generator(self, omega: float = 1.0) -> Generator:
        return clock_generator(self.dim, omega)


def block_dimension(per_site_dim: int, L: int) -> int:
    """Effective dimension ``L*(d_C - 1) + 1`` of an L-site entangled block."""
    return L * (per_site_dim - 1) + 1


def time_basis_matrix(d: int) -> np.ndarray:
    """Matrix whose column ``k`` is the time-basis vector ``|theta_k>``."""
    if d < 1:
        raise ValueError(f"invalid dimension {d}")
    r = np.arange(d)
    return np.exp(-2j * np.pi * np.outer(r, r) / d) / np.sqrt(d)


def make_time_basis_state(d: int, k: int) -> ClockState:
    """Time-basis state ``|theta_k>``, with ``k`` read modulo ``d``."""
    if d < 1:
        raise ValueError(f"invalid dimension {d}")
    k = int(k) % d
    amp = np.exp(-2j * np.pi * k * np.arange(d) / d) / np.sqrt(d)
    return ClockState(d, amp, "swp", {"k0": float(k)})


def make_swp_state(d: int, k0: int = 0) -> ClockState:
    """Salecker-Wigner-Peres clock: a single time-basis state."""
    return make_time_basis_state(d, k0)


def _window(d: int, k0: float) -> np.ndarray:
    # integers k with -d/2 <= k0 - k < d/2
    lo = int(np.floor(k0 - d / 2)) - 1
    ks = np.arange(lo, lo + d + 3)
    keep = (k0 - ks >= -d / 2) & (k0 - ks < d / 2)
    return ks[keep]


def make_quasi_ideal_state(d: int, k1_0: float = 0.0, n0: float | None = None,
                           sigma: float = 2.0) -> ClockState:
    """Quasi-ideal clock: a Gaussian superposition of time-basis states.

    Parameters
    ----------
    d : int
        Clock dimension.
    k1_0 : float
        Centre of the Gaussian on the time-basis index. May be non-integer.
    n0 : float, optional
        Mean energy; defaults to the midpoint ``(d-1)/2``.
    sigma : float
        Width, in ``(0, d)``.

    Returns
    -------
    ClockState
        Normalised numerically. The coefficient of ``|theta_k>`` is
        ``exp(-pi (k-k1_0)^2 / sigma^2) exp(2 pi i n0 (k-k1_0) / d)`` for the
        ``d`` integers ``k`` in the window ``k1_0 - d/2 < k <= k1_0 + d/2``.
    """
    if d < 2:
        raise ValueError(f"invalid dimension {d}")
    if n0 is None:
        n0 = (d - 1) / 2
    if not 0 < sigma < d:
        raise ValueError(f"sigma must lie in (0, {d}), got {sigma}")
    if not 0 < n0 < d - 1:
        raise ValueError(f"n0 must lie in (0, {d - 1}), got {n0}")
    ks = _window(d, k1_0)
    x = ks - k1_0
    coef = np.exp(-np.pi * x**2 / sigma**2) * np.exp(2j * np.pi * n0 * x / d)
    theta = np.exp(-2j * np.pi * np.outer(ks, np.arange(d)) / d) / np.sqrt(d)
    amp = coef @ theta
    amp /= np.linalg.norm(amp)
    return ClockState(d, amp, "quasi_ideal",
                      {"k0": float(k1_0), "n0": float(n0), "sigma": float(sigma)})


def make_custom_state(amplitudes, k0: float = 0.0) -> ClockState:
    """Wrap (and normalise) an arbitrary amplitude vector."""
    amp = np.asarray(amplitudes, dtype=np.complex128)
    norm = np.linalg.norm(amp)
    if norm == 0:
        raise ValueError("zero vector is not a state")
    return ClockState(amp.size, amp / norm, "custom", {"k0": float(k0)})


def evolve(state: ClockState, t: float, gen: Generator | None = None) -> ClockState:
    """Apply ``exp(-i t H)`` to a clock state."""
    if gen is None:
        gen = state.generator()
    if gen.dim != state.dim:
        raise ValueError(f"generator dimension {gen.dim} != state dimension {state.dim}")
    return replace(state, amplitudes=gen.phases(t) * state.amplitudes)


def embed_L(per_site_dim: int, L: int, kind: str = "quasi_ideal", **params) -> ClockState:
    """Effective clock of an L-site entangled block.

    The block is represented on its non-degenerate subspace of dimension
    ``L*(per_site_dim-1)+1``, spanned by one energy eigenvector per total
    energy. ``kind`` selects ``"swp"`` (parameter ``k0``) or
    ``"quasi_ideal"`` (parameters ``k1_0``, ``n0``, ``sigma``).
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if per_site_dim < 2:
        raise ValueError(f"per-site dimension must be >= 2, got {per_site_dim}")
    d = block_dimension(per_site_dim, L)
    if kind == "swp":
        base = make_swp_state(d, params.get("k0", 0))
    elif kind == "quasi_ideal":
        base = make_quasi_ideal_state(d, params.get("k1_0", 0.0), params.get("n0"),
                                      params["sigma"])
    else:
        raise ValueError(f"unknown clock kind {kind!r}")
    return replace(base, per_site_dim=per_site_dim, embed_factor=L)


def materialize_block(state: ClockState) -> tuple[np.ndarray, np.ndarray]:
    """Explicit L-fold tensor realisation of an embedded block.

    Returns
    -------
    levels : np.ndarray
        Total energy of each product basis state of ``per_site_dim**L`` sites.
    isometry : np.ndarray
        ``(per_site_dim**L, dim)`` matrix whose column ``r`` is the uniform
        superposition of all product states with total energy ``r``.
    """
    dc, L = state.per_site_dim, state.embed_factor
    digits = np.array(list(itertools.product(range(dc), repeat=L)), dtype=np.int64)
    levels = digits.sum(axis=1)
    W = np.zeros((dc**L, state.dim))
    for r in range(state.dim):
        sel = levels == r
        W[sel, r] = 1 / np.sqrt(sel.sum())
    return levels, W


def time_basis_overlaps(amplitudes: np.ndarray) -> np.ndarray:
    """Overlaps ``<theta_k|psi>`` for every k."""
    d = amplitudes.shape[-1]
    return amplitudes @ time_basis_matrix(d).conj()


def is_t_incoherent(state: ClockState, gen: Generator | None = None,
                    grid: int | None = None, tol: float = 1e-9) -> bool:
    """Whether the state is diagonal in the time basis somewhere on its orbit.

    The orbit over one period is sampled on ``grid`` uniform points
    (default ``8*dim``); the check is exact only at those points.
    """
    if gen is None:
        gen = state.generator()
    grid = 8 * state.dim if grid is None else grid
    if grid < state.dim:
        raise ValueError("grid must have at least dim points")
    ts = np.arange(grid) * gen.period / grid
    psi_t = np.exp(-1j * gen.omega * np.outer(ts, gen.array)) * state.amplitudes
    c = time_basis_overlaps(psi_t)
    rho = c[:, :, None] * c[:, None, :].conj()
    idx = np.arange(state.dim)
    rho[:, idx, idx] = 0
    off = np.linalg.norm(rho, axis=(1, 2))
    return bool(off.min() < tol)
