"""Named experiments shared by the command line and the acceptance tests.

Each experiment turns a :class:`RunConfig` into a list of result rows plus
optional log-log fits. Rows are plain dicts with the columns of
:data:`COLUMNS`.
"""
from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .align import alignment_probability, alignment_probability_timeavg_oracle
from .clock import block_dimension, embed_L, make_quasi_ideal_state, make_swp_state
from .codes import CovariantCode, code_from_dict, make_identity_code, make_unitary_conjugation_code
from .fidelity import code_converse_bound, f_worst_direct, f_worst_lower
from .phase3 import PhaseErrorSpec, three_clock_code, three_clock_pipeline
from .pipeline import (
    SINGLE_CLOCK,
    ChannelLawError,
    f_tables,
    full_channel,
    page_wootters_condition,
    stationarity_residual,
    tensor_readout,
)

__all__ = [
    "EXPERIMENTS",
    "COLUMNS",
    "RunConfig",
    "InvariantError",
    "fit_loglog",
    "sigma_for",
    "optimize_sigma",
    "qi_lower_gap",
    "build_code",
    "predicted_cost",
    "run_experiment",
]

EXPERIMENTS = ("swp-scaling", "qi-scaling", "l-site-equivalence", "phase3-sweep",
               "align-bench", "pw-check", "converse-audit")

COLUMNS = ("experiment", "d", "d_C", "L", "M", "clock", "sigma", "point",
           "f_lower", "f_direct", "f_converse", "one_minus_f", "metric", "wall_time_ms")


class InvariantError(RuntimeError):
    """A computed quantity broke a law it must satisfy."""

    def __init__(self, message, params=None):
        super().__init__(message)
        self.params = params or {}


@dataclass
class RunConfig:
    experiment: str
    d_list: list
    sigma_policy: str = "sqrt_d"
    sigma_range: tuple = ("1", "d/4")
    L: list = field(default_factory=lambda: [1])
    M: int = 1
    clock: str = ""
    code: dict = field(default_factory=lambda: {"kind": "identity", "dim": 2,
                                                "levels_L": [0, 1], "levels_Co": [0, 0]})
    seed: int = 0
    restarts: int = 16
    direct: bool = True
    error_index: int = 0
    points: int = 0
    gap: int = 1

    def clock_kind(self) -> str:
        if self.clock:
            return self.clock
        return "swp" if self.experiment == "swp-scaling" else "quasi_ideal"


def fit_loglog(xs, ys) -> tuple[float, float, float]:
    """Ordinary least squares of ``ln y`` on ``ln x``; returns slope, intercept, R^2."""
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.size < 3 or x.size != y.size:
        raise ValueError("need at least three (x, y) points")
    if np.any(y <= 0) or np.any(x <= 0):
        raise ValueError("log-log fit needs positive values")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ np.array([slope, intercept])
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def build_code(spec: dict):
    kind = spec.get("kind", "identity")
    if kind == "identity":
        return make_identity_code(int(spec.get("dim", 2)), spec["levels_L"], spec["levels_Co"])
    if kind == "unitary":
        return make_unitary_conjugation_code(_matrix(spec["encoder"]),
                                             [_matrix(U) for U in spec["noise"]],
                                             spec["levels_L"], spec["levels_Co"])
    if kind == "file":
        with open(spec["path"]) as fh:
            return code_from_dict(json.load(fh))
    raise ValueError(f"unknown code kind {kind!r}")


def _matrix(obj):
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj.get("im", 0.0), dtype=float)
    return np.asarray(obj, dtype=np.complex128)


def _single_qi_code(base, d, sigma, L=1, d_C=None):
    if L == 1:
        clock = make_quasi_ideal_state(d, 0.0, None, sigma)
    else:
        clock = embed_L(d_C, L, "quasi_ideal", sigma=sigma)
    return CovariantCode(base, (clock,))


def qi_lower_gap(base, d, sigma) -> float:
    """``1 - f_lower`` for one quasi-ideal clock of width ``sigma``."""
    return 1 - f_worst_lower(_single_qi_code(base, d, sigma))


def optimize_sigma(base, d, lo, hi, step=0.25):
    """Width minimising ``1 - f_lower``: grid scan then bounded refinement."""
    hi = min(hi, d - 1e-9)
    grid = np.arange(lo, hi + 1e-12, step)
    if grid.size == 0:
        grid = np.array([lo])
    vals = np.array([qi_lower_gap(base, d, s) for s in grid])
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if b > a:
        res = minimize_scalar(lambda s: qi_lower_gap(base, d, s), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-6})
        if res.fun < vals[i]:
            return float(res.x), float(res.fun)
    return float(grid[i]), float(vals[i])


def _bound(expr: str, d: int) -> float:
    expr = str(expr).strip()
    if expr.startswith("d/"):
        return d / float(expr[2:])
    if expr.startswith("d*"):
        return d * float(expr[2:])
    if expr == "d":
        return float(d)
    return float(expr)


def sigma_for(cfg: RunConfig, base, d: int) -> float:
    policy = cfg.sigma_policy
    if policy.startswith("fixed:"):
        return float(policy.split(":", 1)[1])
    if policy == "sqrt_d":
        return float(np.sqrt(d))
    if policy == "log32_d":
        return float(np.log(d) ** 1.5)
    if policy == "grid-optimize":
        lo, hi = (_bound(x, d) for x in cfg.sigma_range)
        return optimize_sigma(base, d, lo, hi)[0]
    raise ValueError(f"unknown sigma policy {policy!r}")


def predicted_cost(cfg: RunConfig) -> float:
    """Predicted inner operations: outcomes times lag terms, per channel evaluation.

    One evaluation with ``N`` clocks of dimension ``d`` touches
    ``d**N * (N*(d-1) + 1)`` products per charge value, which is ``~d^3``
    for the single-clock sweeps with a width search.
    """
    total = 0.0
    for d in cfg.d_list:
        if cfg.experiment == "l-site-equivalence":
            for L in cfg.L:
                deff = block_dimension(d, L)
                total += float(deff) ** 2 + float(d) ** L * deff
            continue
        n_clocks = 3 if cfg.experiment == "phase3-sweep" else 1
        points = 3 * (cfg.points or 17) if cfg.experiment == "phase3-sweep" else 1
        evals = 1
        if cfg.sigma_policy == "grid-optimize":
            evals = d + 25
        per_eval = float(d) ** n_clocks * (n_clocks * (d - 1) + 1) * 3
        total += per_eval * points * evals
    return total


def _row(cfg, **kw):
    row = {c: "" for c in COLUMNS}
    row.update(experiment=cfg.experiment, M=cfg.M)
    row.update(kw)
    return row


def _direct(cfg, channel):
    if not cfg.direct:
        return float("nan")
    return f_worst_direct(channel, cfg.restarts, seed=cfg.seed)[0]


def _check_chain(f_lower, f_direct, f_conv, params):
    if not np.isnan(f_direct):
        if f_lower > f_direct + 1e-6:
            raise InvariantError("lower bound exceeds direct fidelity", params)
        if f_direct > f_conv + 1e-6:
            raise InvariantError("direct fidelity exceeds the converse cap", params)


def _scaling_point(cfg, base, d, L, sigma):
    kind = cfg.clock_kind()
    if kind == "swp":
        clock = make_swp_state(d) if L == 1 else embed_L(d, L, "swp")
        sigma = float("nan")
    else:
        clock = (make_quasi_ideal_state(d, 0.0, None, sigma) if L == 1
                 else embed_L(d, L, "quasi_ideal", sigma=sigma))
    code = CovariantCode(base, (clock,) * cfg.M, frozenset(range(1, cfg.M)))
    R = base.charge_range()
    tables = f_tables(code, range(-R, R + 1))
    channel = full_channel(code, cfg.error_index, SINGLE_CLOCK, tables=tables)
    channel.meta.update(d=d, L=L, sigma=sigma)
    channel.check()
    f_lo = f_worst_lower(code, SINGLE_CLOCK, tables)
    f_dir = _direct(cfg, channel)
    f_conv = code_converse_bound(code)
    params = {"d": d, "L": L, "sigma": sigma}
    _check_chain(f_lo, f_dir, f_conv, params)
    return _row(cfg, d=code.d, d_C=d, L=L, clock=kind, sigma=sigma, f_lower=f_lo,
                f_direct=f_dir, f_converse=f_conv, one_minus_f=1 - f_lo, metric=1 - f_lo)


def _scaling(cfg, base, pool):
    jobs = []
    for d in cfg.d_list:
        for L in cfg.L:
            deff = block_dimension(d, L)
            sigma = sigma_for(cfg, base, deff) if cfg.clock_kind() != "swp" else float("nan")
            jobs.append((d, L, sigma))
    rows = _map(pool, lambda job: _scaling_point(cfg, base, *job), jobs)
    fits = []
    if len(rows) >= 3:
        fits.append(("d", "one_minus_f", *fit_loglog([r["d"] for r in rows],
                                                     [r["one_minus_f"] for r in rows])))
    return rows, fits


def _lsite_point(cfg, base, d_C, L):
    kind = cfg.clock_kind()
    deff = block_dimension(d_C, L)
    sigma = sigma_for(cfg, base, deff) if kind != "swp" else float("nan")
    params = {"sigma": sigma} if kind != "swp" else {}
    block = embed_L(d_C, L, kind, **params)
    plain = (make_swp_state(deff) if kind == "swp"
             else make_quasi_ideal_state(deff, 0.0, None, sigma))
    code_b = CovariantCode(base, (block,))
    code_p = CovariantCode(base, (plain,))
    R = base.charge_range()
    Qs = range(-R, R + 1)
    tab_t = f_tables(code_b, Qs, [tensor_readout(block)])
    tab_p = f_tables(code_p, Qs)
    ch_t = full_channel(code_b, cfg.error_index, readouts=[tensor_readout(block)], tables=tab_t).check()
    ch_p = full_channel(code_p, cfg.error_index, tables=tab_p).check()
    choi_dist = float(np.abs(ch_t.choi - ch_p.choi).max())
    f0_dist = float(np.abs(tab_t[0] - tab_p[0]).max())
    if choi_dist > 1e-10 or f0_dist > 1e-12:
        raise InvariantError("entangled block differs from the single clock",
                             {"d_C": d_C, "L": L, "choi": choi_dist, "F0": f0_dist})
    f_lo = f_worst_lower(code_b, SINGLE_CLOCK, tab_t)
    f_dir = _direct(cfg, ch_t)
    f_conv = code_converse_bound(code_b)
    _check_chain(f_lo, f_dir, f_conv, {"d_C": d_C, "L": L})
    return _row(cfg, d=deff, d_C=d_C, L=L, clock=kind, sigma=sigma, f_lower=f_lo, f_direct=f_dir,
                f_converse=f_conv, one_minus_f=1 - f_lo, metric=choi_dist, point=f"F0_dist={f0_dist:.3e}")


def _lsite(cfg, base, pool):
    jobs = [(d, L) for d in cfg.d_list for L in cfg.L]
    return _map(pool, lambda job: _lsite_point(cfg, base, *job), jobs), []


def _phase3(cfg, base, pool):
    n_t = cfg.points or 17
    rows, worst = [], []
    for d in cfg.d_list:
        sigma = sigma_for(cfg, base, d)
        code = three_clock_code(base, make_quasi_ideal_state(d, 0.0, None, sigma))
        jobs = [(b, j) for j in range(n_t) for b in (1, 2, 3)]

        def point(job, code=code, d=d, sigma=sigma):
            b, j = job
            t_ph = 2 * np.pi / base.omega * j / n_t
            rep = three_clock_pipeline(code, PhaseErrorSpec(b, t_ph), j=cfg.error_index,
                                       restarts=cfg.restarts, seed=cfg.seed)
            if rep.f_lower > rep.f_direct + 1e-6:
                raise InvariantError("lower bound exceeds direct fidelity", rep.params)
            return _row(cfg, d=d, d_C=d, L=1, M=3, clock="quasi_ideal", sigma=sigma,
                        point=f"block={b};t_ph_index={j}", f_lower=rep.f_lower, f_direct=rep.f_direct,
                        f_converse=rep.f_converse, one_minus_f=1 - rep.f_direct,
                        metric=1 - rep.f_direct)

        block_rows = _map(pool, point, jobs)
        rows.extend(block_rows)
        worst.append(max(r["one_minus_f"] for r in block_rows))
    fits = []
    if len(worst) >= 3:
        fits.append(("d", "max_one_minus_f", *fit_loglog(cfg.d_list, worst)))
    return rows, fits


def _align(cfg, base, pool):
    def point(d):
        kind = cfg.clock_kind()
        if kind == "swp":
            frame, sigma = make_swp_state(d), float("nan")
        else:
            sigma = sigma_for(cfg, base, d)
            frame = make_quasi_ideal_state(d, 0.0, None, sigma)
        res = alignment_probability(frame, gap=cfg.gap)
        oracle = alignment_probability_timeavg_oracle(frame, gap=cfg.gap)
        if abs(res.p - oracle.p) > 1e-10:
            raise InvariantError("exact and time-averaged alignment disagree", {"d": d})
        return _row(cfg, d=d, d_C=d, L=1, clock=kind, sigma=sigma, one_minus_f="",
                    metric=res.p, point=f"A1={res.A1:.17g};A2={res.A2:.17g}")

    rows = _map(pool, point, list(cfg.d_list))
    fits = []
    if len(rows) >= 3:
        fits.append(("d", "p", *fit_loglog(cfg.d_list, [r["metric"] for r in rows])))
    return rows, fits


def _pw(cfg, base, pool):
    if not base.gen_L.is_trivial():
        raise ValueError("pw-check needs a trivial logical generator")
    n_tau = cfg.points or 9
    rho = np.full((base.d_L, base.d_L), 1 / base.d_L, dtype=np.complex128)

    def point(d):
        sigma = sigma_for(cfg, base, d)
        code = CovariantCode(base, (make_quasi_ideal_state(d, 0.0, None, sigma),))
        stat = stationarity_residual(code, rho)
        if stat > 1e-10:
            raise InvariantError("encoded state is not stationary", {"d": d, "residual": stat})
        out = []
        for j in range(n_tau):
            tau = 2 * np.pi / base.omega * j / n_tau
            dist = page_wootters_condition(code, rho, tau)
            out.append(_row(cfg, d=d, d_C=d, L=1, clock="quasi_ideal", sigma=sigma,
                            point=f"tau_index={j};stationarity={stat:.3e}", metric=dist))
        return out

    rows = [r for chunk in _map(pool, point, list(cfg.d_list)) for r in chunk]
    fits = []
    if len(cfg.d_list) >= 3:
        means = [np.mean([r["metric"] for r in rows if r["d"] == d]) for d in cfg.d_list]
        fits.append(("d", "mean_distance", *fit_loglog(cfg.d_list, means)))
    return rows, fits


def _converse(cfg, base, pool):
    cfg_direct = RunConfig(**{**cfg.__dict__, "direct": True})
    rows, _ = _scaling(cfg_direct, base, pool)
    for r in rows:
        r["metric"] = r["f_converse"] - r["f_direct"]
    return rows, []


_DISPATCH = {
    "swp-scaling": _scaling,
    "qi-scaling": _scaling,
    "l-site-equivalence": _lsite,
    "phase3-sweep": _phase3,
    "align-bench": _align,
    "pw-check": _pw,
    "converse-audit": _converse,
}


def _map(pool, fn, items):
    if pool is None:
        return [_timed(fn, x) for x in items]
    return list(pool.map(lambda x: _timed(fn, x), items))


def _timed(fn, x):
    t = time.perf_counter()
    out = fn(x)
    ms = (time.perf_counter() - t) * 1e3
    for r in out if isinstance(out, list) else [out]:
        r["wall_time_ms"] = ms
    return out


def run_experiment(cfg: RunConfig, threads: int = 1):
    """Run one experiment; returns ``(rows, fits)``.

    Raises :class:`InvariantError` (or :class:`ChannelLawError`) when a
    computed channel or fidelity chain breaks its laws.
    """
    base = build_code(cfg.code)
    fn = _DISPATCH[cfg.experiment]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return fn(cfg, base, pool)
    return fn(cfg, base, None)


# re-exported for callers catching both failure kinds
InvariantFailures = (InvariantError, ChannelLawError)
