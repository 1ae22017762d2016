"""Reference-frame alignment with a clock frame.

A qubit message with level gap ``g * omega`` is sent together with a clock
frame through a channel that applies an unknown common time shift. The
receiver's best reconstruction is a mixture of the identity channel and a
fully decohering one, weighted by ``p = (A1 - A2) / A1``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clock import ClockState, Generator

__all__ = ["AlignmentResult", "alignment_probability", "alignment_probability_timeavg_oracle"]


@dataclass(frozen=True)
class AlignmentResult:
    A1: float
    A2: float
    p: float
    frame: str


def _describe(frame: ClockState) -> str:
    extras = ",".join(f"{k}={v:g}" for k, v in sorted(frame.params.items()))
    return f"{frame.kind}(d={frame.dim},{extras})"


def _result(A1, A2, frame):
    if A1 <= 0:
        raise ValueError("frame has zero return probability")
    return AlignmentResult(float(A1), float(A2), float((A1 - A2) / A1), _describe(frame))


def alignment_probability(frame: ClockState, gen: Generator | None = None,
                          gap: int = 1) -> AlignmentResult:
    """Decoherence probability from exact sums over energy populations.

    ``A1 = sum_E P(E)^2`` and ``A2 = sum_E P(E) P(E + gap)`` where ``P`` is
    the frame's population of each energy value.
    """
    gen = frame.generator() if gen is None else gen
    if gen.dim != frame.dim:
        raise ValueError("generator and frame dimensions differ")
    lv = gen.array
    pop = np.zeros(lv.max() - lv.min() + 1 + gap)
    np.add.at(pop, lv - lv.min(), np.abs(frame.amplitudes) ** 2)
    A1 = float(pop @ pop)
    A2 = float(pop[:-gap] @ pop[gap:]) if gap > 0 else A1
    return _result(A1, A2, frame)


def alignment_probability_timeavg_oracle(frame: ClockState, gen: Generator | None = None,
                                         grid: int | None = None, gap: int = 1) -> AlignmentResult:
    """Same quantities from a uniform-grid average over one period.

    ``A1`` averages ``|<psi|U(t)|psi>|^2`` and ``A2`` the same weighted by
    ``exp(-i gap omega t)``. The grid must exceed ``2 * (dh + gap)`` so the
    trigonometric sums are integrated exactly.
    """
    gen = frame.generator() if gen is None else gen
    need = 2 * (gen.delta_h + gap) + 1
    grid = need if grid is None else grid
    if grid < need:
        raise ValueError(f"grid of {grid} points is too coarse; need at least {need}")
    ts = np.arange(grid) * gen.period / grid
    ret = np.exp(-1j * gen.omega * np.outer(ts, gen.array)) @ np.abs(frame.amplitudes) ** 2
    w = np.abs(ret) ** 2
    A1 = w.mean()
    A2 = (w * np.exp(-1j * gap * gen.omega * ts)).mean()
    return _result(A1, A2.real, frame)
