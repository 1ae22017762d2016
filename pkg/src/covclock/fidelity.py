"""Worst-case entanglement fidelity: a lower bound, a direct estimate and a cap.

``f_worst(K) = min_phi <phi| (K (x) id)(|phi><phi|) |phi>`` over pure states
of the logical system and an ancilla of the same dimension.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .codes import CovariantCode
from .pipeline import (
    SINGLE_CLOCK,
    ChannelMatrix,
    ChannelLawError,
    f_tables,
    full_channel,
    k_alpha_table,
)

__all__ = [
    "FidelityReport",
    "f_worst_lower",
    "f_worst_direct",
    "product_input_minimum",
    "converse_bound",
    "code_converse_bound",
    "theorem_curves",
    "fit_inverse_d",
    "fidelity_report",
]


@dataclass
class FidelityReport:
    f_lower: float
    f_direct: float
    f_converse: float
    params: dict = field(default_factory=dict)
    minimizer_state: np.ndarray | None = None
    channel: ChannelMatrix | None = None


def _lower_sum(code, tables, ka, R):
    d = code.d
    F0 = tables[0]
    worst = np.zeros_like(F0.real)
    for Q in range(-R, R + 1):
        dev = np.abs(F0 - tables[Q] * np.exp(2j * np.pi * ka * Q / d))
        worst = np.maximum(worst, dev)
    return float(worst.sum())


def f_worst_lower(code: CovariantCode, mode=SINGLE_CLOCK, tables=None, readouts=None) -> float:
    """Bound ``1 - (3/2) sqrt(d_L) d_P sum_k F_0(k) max_Q |p(Q, k)|``.

    ``Q`` ranges over ``|Q| <= dh_L + dh_Co``. The product
    ``F_0 |p|`` is evaluated as ``|F_0 - F_Q exp(2 pi i k_alpha Q/d)|`` so
    zero-probability outcomes contribute nothing.
    """
    base = code.base
    R = base.charge_range()
    if tables is None or any(Q not in tables for Q in range(-R, R + 1)):
        tables = f_tables(code, range(-R, R + 1), readouts)
    ka = k_alpha_table(code, mode)
    return 1 - 1.5 * np.sqrt(base.d_L) * base.d_P * _lower_sum(code, tables, ka, R)


def _state_from_vector(x, d):
    z = x[: d * d] + 1j * x[d * d:]
    z = z / np.linalg.norm(z)
    return z.reshape(d, d)


def _fidelity_of(J4, phi):
    R = phi @ phi.conj().T
    return float(np.einsum("iajb,ia,jb->", J4, R, R.conj()).real)


def f_worst_direct(channel: ChannelMatrix, restarts: int = 16, tol: float = 1e-9,
                   seed: int = 0, product_only: bool = False):
    """Minimise the entanglement fidelity over bipartite pure inputs.

    Multi-start Powell search over the unit sphere of ``C^(d_L^2)``,
    seeded for reproducibility. With ``product_only`` the search is
    restricted to product inputs.

    Returns
    -------
    value : float
    state : np.ndarray
        Minimising input as a ``(d_L, d_L)`` coefficient matrix
        (system index first).
    """
    d = channel.d_in
    if channel.min_eigenvalue() < -1e-8:
        raise ChannelLawError("Choi matrix is not positive semidefinite", channel.meta)
    J4 = channel.choi.reshape(d, d, d, d)
    rng = np.random.default_rng(seed)

    if product_only:
        def state(x):
            a = x[:d] + 1j * x[d: 2 * d]
            b = x[2 * d: 3 * d] + 1j * x[3 * d:]
            return np.outer(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        n = 4 * d
    else:
        def state(x):
            return _state_from_vector(x, d)
        n = 2 * d * d

    best, best_phi = np.inf, None
    for _ in range(restarts):
        x0 = rng.standard_normal(n)
        res = minimize(lambda x: _fidelity_of(J4, state(x)), x0, method="Powell",
                       options={"xtol": tol, "ftol": tol * 1e-3, "maxfev": 20000})
        if res.fun < best:
            best, best_phi = float(res.fun), state(res.x)
    return best, best_phi


def product_input_minimum(channel: ChannelMatrix, restarts: int = 16, seed: int = 0) -> float:
    return f_worst_direct(channel, restarts, seed=seed, product_only=True)[0]


def converse_bound(dh_L: int, dh_Co: int, L: int, d_C: int) -> float:
    """Upper limit ``1 - dh_L^2 / (16 (dh_Co + L d_C)^2)`` on any such code."""
    return 1 - dh_L**2 / (16 * (dh_Co + L * d_C) ** 2)


def code_converse_bound(code: CovariantCode) -> float:
    clock = code.surviving_clocks[0]
    return converse_bound(code.base.gen_L.delta_h, code.base.gen_Co.delta_h,
                          clock.embed_factor, clock.per_site_dim)


def theorem_curves(kind: str, **params) -> float:
    """Leading-order reference curves for overlays.

    kind ``"QI_leading"``: parameters ``d_C, d_L, d_P, dh`` (and optional
    ``L``, giving the entangled-block version); ``"QI_Lsite_leading"`` is
    the same with ``L`` required. ``"SWP_form"``: ``d_C`` and a fitted
    constant ``C``. ``"three_block_shape"``: ``d_C, d_L, d_P, dh`` and
    optional ``L``, the polylog-over-d form for three blocks with one
    phase error.
    """
    if kind in ("QI_leading", "QI_Lsite_leading"):
        x = params.get("L", 1) * params["d_C"]
        pref = 3 * np.pi * np.sqrt(params["d_L"]) * params["d_P"] / 4
        return 1 - pref * (np.log(x) ** 3 / x) ** 2 * params["dh"] ** 2
    if kind == "SWP_form":
        return 1 - params["C"] / (params.get("L", 1) * params["d_C"])
    if kind == "three_block_shape":
        x = params.get("L", 1) * params["d_C"]
        pref = np.sqrt(params["d_L"]) * params["d_P"] * 10 * np.pi * params["dh"] / np.sqrt(3)
        return 1 - pref * np.log(x) ** 7 / x
    raise ValueError(f"unknown curve {kind!r}")


def fit_inverse_d(ds, one_minus_f) -> float:
    """Least-squares constant ``C`` in ``1 - f = C / d``."""
    x = 1 / np.asarray(ds, dtype=float)
    y = np.asarray(one_minus_f, dtype=float)
    return float(x @ y / (x @ x))


def fidelity_report(code: CovariantCode, j: int = 0, mode=SINGLE_CLOCK, restarts: int = 16,
                    seed: int = 0, readouts=None, params=None) -> FidelityReport:
    """Run the pipeline and evaluate all three fidelity figures."""
    R = code.base.charge_range()
    tables = f_tables(code, range(-R, R + 1), readouts)
    channel = full_channel(code, j, mode, readouts, tables).check()
    f_lo = f_worst_lower(code, mode, tables)
    f_dir, phi = f_worst_direct(channel, restarts, seed=seed)
    info = {"d": code.d, "n_clocks": len(code.clocks), "erased": sorted(code.erased),
            "mode": str(mode), "j": j}
    info.update(params or {})
    return FidelityReport(f_lo, f_dir, code_converse_bound(code), info, phi, channel)
