"""Three clock blocks with one unknown phase error, decoded by majority vote.

One of three identical clock blocks is rotated by an unknown time. Each block
is read out; the decoder takes the circular median of the three readings, so
a single rotated block is outvoted by the other two.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .clock import ClockState, evolve
from .codes import BaseCode, CovariantCode
from .fidelity import FidelityReport, fidelity_report

__all__ = [
    "PhaseErrorSpec",
    "AngleTriple",
    "circular_delta",
    "middle_angle",
    "gamma_tilde",
    "k_alpha_middle",
    "three_clock_code",
    "three_clock_pipeline",
]


@dataclass(frozen=True)
class PhaseErrorSpec:
    """Rotation by ``t_ph`` applied to block ``target_block`` (1, 2 or 3)."""

    target_block: int
    t_ph: float

    def __post_init__(self):
        if self.target_block not in (1, 2, 3):
            raise ValueError(f"target_block must be 1, 2 or 3, got {self.target_block}")


@dataclass(frozen=True)
class AngleTriple:
    gammas: tuple
    d: int

    def __post_init__(self):
        g = tuple(float(x) for x in self.gammas)
        if len(g) != 3:
            raise ValueError("need three angles")
        if any(not 0 <= x < self.d for x in g):
            raise ValueError(f"angles must lie in [0, {self.d})")
        object.__setattr__(self, "gammas", g)


def _delta(a, b, d):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.abs(np.mod(a, d) - np.mod(b, d))
    integral = np.all(np.round(a) == a) and np.all(np.round(b) == b)
    if d % 2 == 0 and integral:
        return np.where(x <= d / 2 - 1, x, d - x)
    return np.minimum(x, d - x)


def circular_delta(a: float, b: float, d: int) -> float:
    """Distance between two readings on a circle of ``d`` ticks.

    Integer readings with even ``d`` use the two-case rule
    ``x if x <= d/2 - 1 else d - x`` with ``x = |a - b|``; otherwise the
    natural circular distance is used.
    """
    return float(_delta(a, b, d))


def _middle(g1, g2, g3, d):
    d12, d13, d23 = _delta(g1, g2, d), _delta(g1, g3, d), _delta(g2, g3, d)
    case1 = (d12 >= d13) & (d12 >= d23)
    case2 = ~case1 & (d23 >= d12) & (d23 >= d13)
    w = np.where(case1, 3, np.where(case2, 1, 2))
    value = np.where(w == 3, g3, np.where(w == 1, g1, g2))
    return value, w


def middle_angle(t: AngleTriple) -> tuple[float, int]:
    """Circular median of three angles and its position ``w`` (1-based).

    The pair with the largest separation excludes its two members; ties go
    to the first matching pair in the order (1,2), (2,3), (1,3).
    """
    value, w = _middle(*t.gammas, t.d)
    return float(value), int(w)


def gamma_tilde(k, k0, d):
    """Reading shifted so the nominal centre sits at ``d/2 - 1``."""
    return np.mod(np.asarray(k) + d / 2 - 1 - np.floor(k0), d)


def k_alpha_middle(ks: np.ndarray, centres, d: int) -> np.ndarray:
    """Middle-angle phase estimate ``-d/2 + 1 + median`` for rows of three readings."""
    ks = np.asarray(ks)
    g = [gamma_tilde(ks[:, i], centres[i], d) for i in range(3)]
    value, _ = _middle(*g, d)
    return np.mod(-d / 2 + 1 + value, d)


def three_clock_code(base: BaseCode, block: ClockState) -> CovariantCode:
    return CovariantCode(base, (block, block, block))


def _apply_phase_error(code: CovariantCode, err: PhaseErrorSpec) -> CovariantCode:
    clocks = list(code.clocks)
    i = err.target_block - 1
    clocks[i] = evolve(clocks[i], err.t_ph, clocks[i].generator(code.base.omega))
    return replace(code, clocks=tuple(clocks))


def three_clock_pipeline(code: CovariantCode, err: PhaseErrorSpec, rho_L=None, j: int = 0,
                         restarts: int = 16, seed: int = 0) -> FidelityReport:
    """Fidelity of the middle-angle decoder under a phase error on one block.

    The error rotates the target block's state before readout. The decoder
    uses only the readings and the nominal block centres, never ``err``.
    If ``rho_L`` is given, the decoded output for it is stored in
    ``params["output"]``.
    """
    from .pipeline import THREE_CLOCK_MIDDLE

    if len(code.clocks) != 3 or code.erased:
        raise ValueError("the middle-angle decoder needs exactly three unerased blocks")
    noisy = _apply_phase_error(code, err)
    rep = fidelity_report(noisy, j, THREE_CLOCK_MIDDLE, restarts, seed,
                          params={"target_block": err.target_block, "t_ph": err.t_ph})
    if rho_L is not None:
        rep.params["output"] = rep.channel.apply(np.asarray(rho_L, dtype=np.complex128))
    return rep
