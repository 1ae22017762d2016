"""Command-line driver.

    covclock run <config-file> [--out path] [--threads N] [--gnuplot] [--force]
    covclock verify

Exit codes: 0 success, 1 bad configuration, 2 an invariant failed during the run.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    COLUMNS,
    EXPERIMENTS,
    InvariantError,
    RunConfig,
    fit_loglog,
    predicted_cost,
    run_experiment,
)
from .pipeline import ChannelLawError

__all__ = ["ConfigError", "parse_config", "load_config", "write_csv", "run", "verify", "main",
           "fit_loglog", "SCHEMA"]

SCHEMA = "covclock-results/1"
COST_LIMIT = 1e9


class ConfigError(ValueError):
    pass


_KNOWN = {"experiment", "d_list", "sigma_policy", "sigma_range", "L", "M", "clock", "code",
          "code_dim", "levels_L", "levels_Co", "encoder", "noise", "seed", "restarts", "direct",
          "error_index", "points", "gap", "out"}


def _int_list(key, value):
    try:
        return [int(x) for x in value.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{key}: expected comma-separated integers, got {value!r}") from exc


def parse_config(text: str) -> tuple[RunConfig, dict]:
    """Parse ``key=value`` lines (``#`` starts a comment).

    Returns the run configuration and the raw key/value dict.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KNOWN:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value

    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}")
    d_list = _int_list("d_list", raw.get("d_list", ""))
    if not d_list:
        raise ConfigError("d_list must be a non-empty list of integers")
    if min(d_list) < 2:
        raise ConfigError("all dimensions in d_list must be >= 2")

    kw = {"experiment": exp, "d_list": d_list}
    if "L" in raw:
        kw["L"] = _int_list("L", raw["L"])
        if not kw["L"] or min(kw["L"]) < 1:
            raise ConfigError("L must list integers >= 1")
    for key in ("M", "seed", "restarts", "error_index", "points", "gap"):
        if key in raw:
            try:
                kw[key] = int(raw[key])
            except ValueError as exc:
                raise ConfigError(f"{key}: expected an integer") from exc
    if kw.get("M", 1) < 1 or kw.get("restarts", 1) < 1 or kw.get("seed", 0) < 0:
        raise ConfigError("M and restarts must be >= 1 and seed non-negative")
    if "direct" in raw:
        if raw["direct"].lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError("direct must be a boolean")
        kw["direct"] = raw["direct"].lower() in ("true", "1", "yes")
    if "clock" in raw:
        if raw["clock"] not in ("swp", "quasi_ideal"):
            raise ConfigError("clock must be swp or quasi_ideal")
        kw["clock"] = raw["clock"]

    policy = raw.get("sigma_policy", "sqrt_d")
    if policy.startswith("fixed:"):
        try:
            sigma = float(policy.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigError("fixed sigma must be a number, e.g. fixed:2.0") from exc
        if not 0 < sigma < min(d_list):
            raise ConfigError("fixed sigma must lie in (0, min d)")
    elif policy not in ("sqrt_d", "log32_d", "grid-optimize"):
        raise ConfigError(f"unknown sigma_policy {policy!r}")
    kw["sigma_policy"] = policy
    if "sigma_range" in raw:
        parts = tuple(p.strip() for p in raw["sigma_range"].split(","))
        if len(parts) != 2:
            raise ConfigError("sigma_range must be lo,hi")
        kw["sigma_range"] = parts
    if policy == "grid-optimize":
        from .experiments import _bound

        lo_hi = kw.get("sigma_range", RunConfig.sigma_range)
        for d in d_list:
            try:
                lo, hi = (_bound(x, d) for x in lo_hi)
            except ValueError as exc:
                raise ConfigError(f"sigma_range: {exc}") from exc
            if not 0 < lo < hi < d:
                raise ConfigError(f"grid-optimize range must satisfy 0 < lo < hi < d (d={d})")

    kw["code"] = _code_spec(raw)
    return RunConfig(**kw), raw


def _code_spec(raw):
    kind = raw.get("code", "identity")
    if kind.startswith("file:"):
        return {"kind": "file", "path": kind[5:]}
    try:
        dim = int(raw.get("code_dim", 2))
    except ValueError as exc:
        raise ConfigError("code_dim must be an integer") from exc
    spec = {"kind": kind, "dim": dim,
            "levels_L": _int_list("levels_L", raw.get("levels_L", ",".join(map(str, range(dim))))),
            "levels_Co": _int_list("levels_Co", raw.get("levels_Co", ",".join("0" * dim)))}
    if kind == "unitary":
        try:
            spec["encoder"] = json.loads(raw["encoder"])
            spec["noise"] = json.loads(raw["noise"])
        except (KeyError, json.JSONDecodeError) as exc:
            raise ConfigError("unitary code needs JSON 'encoder' and 'noise' entries") from exc
    elif kind != "identity":
        raise ConfigError(f"unknown code {kind!r}")
    return spec


def load_config(path) -> tuple[RunConfig, dict]:
    cfg, raw = parse_config(Path(path).read_text())
    env_seed = os.environ.get("COVCLOCK_SEED")
    if env_seed is not None:
        try:
            cfg.seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError("COVCLOCK_SEED must be an integer") from exc
    return cfg, raw


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else format(float(v), ".17g")
    return str(v)


def write_csv(path, cfg: RunConfig, rows, fits):
    with open(path, "w", newline="") as fh:
        fh.write(f"# {SCHEMA} experiment={cfg.experiment} seed={cfg.seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in COLUMNS])
        fh.write("# fit,x,y,slope,intercept,r2\n")
        for x, y, slope, icpt, r2 in fits:
            fh.write(f"# fit,{x},{y},{_fmt(slope)},{_fmt(icpt)},{_fmt(r2)}\n")


def write_gnuplot(csv_path: Path, cfg: RunConfig):
    script = csv_path.with_suffix(".gp")
    ycol = COLUMNS.index("one_minus_f") + 1
    if cfg.experiment in ("align-bench", "pw-check", "l-site-equivalence"):
        ycol = COLUMNS.index("metric") + 1
    script.write_text(
        "set datafile separator ','\n"
        "set datafile commentschars '#'\n"
        "set logscale xy\n"
        "set xlabel 'd'\n"
        f"set ylabel '{COLUMNS[ycol - 1]}'\n"
        "set key off\n"
        f"plot '{csv_path.name}' every ::1 using 2:{ycol} with linespoints\n")
    return script


def run(config_path, out=None, threads=1, gnuplot=False, force=False) -> int:
    try:
        cfg, raw = load_config(config_path)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    cost = predicted_cost(cfg)
    if cost > COST_LIMIT and not force:
        print(f"config error: predicted {cost:.3g} inner operations exceeds {COST_LIMIT:.0e}; "
              "pass --force to run anyway", file=sys.stderr)
        return 1
    out = Path(out or raw.get("out") or f"{cfg.experiment}.csv")
    try:
        rows, fits = run_experiment(cfg, threads)
    except (InvariantError, ChannelLawError) as exc:
        params = getattr(exc, "params", None) or getattr(exc, "meta", {})
        print(f"invariant failure: {exc}; parameters: {params}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    write_csv(out, cfg, rows, fits)
    if gnuplot:
        write_gnuplot(out, cfg)
    for x, y, slope, icpt, r2 in fits:
        print(f"fit {y} vs {x}: slope={slope:.4f} intercept={icpt:.4f} r2={r2:.6f}")
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def verify(stream=None) -> int:
    from .invariants import run_invariant_suite

    stream = sys.stdout if stream is None else stream
    results = run_invariant_suite()
    failed = 0
    for name, ok, detail in results:
        stream.write(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}\n")
        failed += not ok
    stream.write(f"{len(results) - failed}/{len(results)} invariants hold\n")
    return 0 if failed == 0 else 2


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="covclock", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run a named experiment from a key=value config file")
    p_run.add_argument("config")
    p_run.add_argument("--out")
    p_run.add_argument("--threads", type=int, default=1)
    p_run.add_argument("--gnuplot", action="store_true")
    p_run.add_argument("--force", action="store_true")
    sub.add_parser("verify", help="check the library's numerical invariants")
    args = parser.parse_args(argv)
    if args.command == "run":
        return run(args.config, args.out, max(1, args.threads), args.gnuplot, args.force)
    return verify()


if __name__ == "__main__":
    sys.exit(main())
