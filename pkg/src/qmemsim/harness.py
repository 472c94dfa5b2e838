"""Experiment orchestration: seeded grids, CSV persistence, Arrhenius fits.

Results use one CSV schema for every experiment kind:

    kind,family,L,beta,seed,decoder,observable,value,censored,extra_json

Rows are written in canonical sorted order and every value formats via
``repr``, so a rerun with the same config and master seed is byte-identical.
Per-trial generators derive from SeedSequence([master_seed, point_index,
trial_index]); the matching seed label ``master.point.trial`` is recorded on
each row, which makes any single trial reproducible in isolation.
"""
from __future__ import annotations

import csv
import functools
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import __version__ as _version
from .barriers import StateCapExceeded, exact_barrier, ordered_flip_barrier
from .models import build_model, code_distance, validate_model
from .spectral import ground_splitting
from .thermal import default_tracked, lifetime_trial

CSV_HEADER = ["kind", "family", "L", "beta", "seed", "decoder", "observable",
              "value", "censored", "extra_json"]


@dataclass
class ExperimentConfig:
    kind: str
    family: str = "surface2d"
    sizes: list[int] = field(default_factory=lambda: [2, 3])
    betas: list[float] = field(default_factory=lambda: [1.0])
    trials: int = 10
    t_max: int = 1000
    check_interval: int = 1
    decoder: str | None = None
    tracked: list[str] | None = None
    master_seed: int = 0
    out: str | None = None
    threads: int = 1
    method: str = "exact"          # barrier experiments
    target: str = "X"              # barrier experiments: "X", "Z", or "both"
    direction: str = "Z"           # spectrum experiments
    epsilons: list[float] = field(default_factory=lambda: [0.0, 0.1])
    gauge_only: bool = False
    state_cap: int = 1 << 20

    _KINDS = ("analyze", "barrier", "dynamics", "spectrum")

    def validate(self) -> None:
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if not self.sizes:
            raise ValueError("sizes must be non-empty")
        if not self.betas:
            raise ValueError("betas must be non-empty")
        if not self.epsilons:
            raise ValueError("epsilons must be non-empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.t_max < self.check_interval:
            raise ValueError("t_max must be >= check_interval")
        if self.check_interval < 1:
            raise ValueError("check_interval must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f for f in cls.__dataclass_fields__ if not f.startswith("_")}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg


@dataclass(frozen=True)
class ResultRow:
    kind: str
    family: str
    linear_size: int
    beta: float | None
    seed: str
    decoder: str
    observable: str
    value: float | int | None
    censored: bool
    extra: dict

    def sort_key(self):
        return (self.kind, self.family, self.linear_size,
                -1.0 if self.beta is None else self.beta, self.seed,
                self.decoder, self.observable, _extra_json(self.extra))

    def to_csv_fields(self) -> list[str]:
        return [
            self.kind,
            self.family,
            str(self.linear_size),
            "" if self.beta is None else repr(float(self.beta)),
            self.seed,
            self.decoder,
            self.observable,
            "" if self.value is None else
            (str(self.value) if isinstance(self.value, int) else repr(float(self.value))),
            "1" if self.censored else "0",
            _extra_json(self.extra),
        ]


def _extra_json(extra: dict) -> str:
    if not extra:
        return ""
    return json.dumps(extra, sort_keys=True, separators=(",", ":"))


def _seed_label(master: int, point: int, trial: int) -> str:
    return f"{master}.{point}.{trial}"


def _rng_for(master: int, point: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master, point, trial])))


@functools.lru_cache(maxsize=64)
def _cached_model(family: str, size: int, gauge_only: bool):
    return build_model(family, size, gauge_only=gauge_only)


@dataclass
class RunResult:
    rows: list[ResultRow]
    summary: dict


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    cfg.validate()
    if cfg.kind == "analyze":
        rows, refusals = _run_analyze(cfg)
    elif cfg.kind == "barrier":
        rows, refusals = _run_barrier(cfg)
    elif cfg.kind == "dynamics":
        rows, refusals = _run_dynamics(cfg)
    else:
        rows, refusals = _run_spectrum(cfg)
    rows.sort(key=ResultRow.sort_key)
    censored = sum(1 for r in rows if r.censored)
    summary = {
        "kind": cfg.kind,
        "rows": len(rows),
        "refusals": refusals,
        "censored_rows": censored,
        "version": _version,
        "master_seed": cfg.master_seed,
    }
    if cfg.out:
        write_rows(rows, cfg.out)
    return RunResult(rows, summary)


def _run_analyze(cfg: ExperimentConfig):
    rows = []
    refusals = 0
    for point, L in enumerate(sorted(cfg.sizes)):
        m = _cached_model(cfg.family, L, cfg.gauge_only)
        seed = _seed_label(cfg.master_seed, point, 0)
        report = validate_model(m)
        base = dict(kind="analyze", family=cfg.family, linear_size=L, beta=None,
                    seed=seed, decoder="", censored=False)
        rows.append(ResultRow(observable="n", value=m.n, extra={}, **base))
        rows.append(ResultRow(observable="k", value=m.k, extra={}, **base))
        rows.append(ResultRow(observable="valid", value=1 if report.ok else 0,
                              extra={} if report.ok else
                              {"invariant": report.invariant, "witness": report.witness},
                              **base))
        try:
            dist = code_distance(m)
            rows.append(ResultRow(observable="distance", value=dist.distance,
                                  extra={"exact": dist.exact}, **base))
        except ValueError as exc:
            refusals += 1
            rows.append(ResultRow(observable="distance", value=None,
                                  extra={"refused": str(exc)}, **base))
    return rows, refusals


def _run_barrier(cfg: ExperimentConfig):
    rows = []
    refusals = 0
    targets = ("X", "Z") if cfg.target == "both" else (cfg.target,)
    point = 0
    for L in sorted(cfg.sizes):
        m = _cached_model(cfg.family, L, cfg.gauge_only)
        for kind in targets:
            seed = _seed_label(cfg.master_seed, point, 0)
            base = dict(kind="barrier", family=cfg.family, linear_size=L, beta=None,
                        seed=seed, decoder="", censored=False)
            try:
                if cfg.method == "exact":
                    res = exact_barrier(m, kind, state_cap=cfg.state_cap)
                elif cfg.method == "annealed":
                    res = ordered_flip_barrier(m, (kind, 0), "annealed",
                                               seed=cfg.master_seed + point)
                elif cfg.method == "exhaustive":
                    res = ordered_flip_barrier(m, (kind, 0), "exhaustive_orders")
                else:
                    raise ValueError(f"unknown barrier method {cfg.method!r}")
                rows.append(ResultRow(
                    observable=f"barrier[{kind}bar]", value=res.barrier,
                    extra={"method": res.method, "witness_length": len(res.witness)},
                    **base))
            except (StateCapExceeded, ValueError) as exc:
                refusals += 1
                rows.append(ResultRow(observable=f"barrier[{kind}bar]", value=None,
                                      extra={"refused": str(exc)}, **base))
            point += 1
    return rows, refusals


def _dynamics_points(cfg: ExperimentConfig):
    return [(L, beta) for L in sorted(cfg.sizes) for beta in sorted(cfg.betas)]


def _dynamics_trial_args(cfg: ExperimentConfig):
    decoder = cfg.decoder
    for point, (L, beta) in enumerate(_dynamics_points(cfg)):
        for trial in range(cfg.trials):
            yield (cfg.family, L, cfg.gauge_only, beta, decoder, cfg.t_max,
                   cfg.check_interval, tuple(cfg.tracked) if cfg.tracked else None,
                   cfg.master_seed, point, trial)


def _run_one_trial(args) -> list[dict]:
    (family, L, gauge_only, beta, decoder, t_max, check_interval, tracked,
     master_seed, point, trial) = args
    m = _cached_model(family, L, gauge_only)
    if decoder is None:
        decoder = "majority" if m.classical else ("match2d" if family == "surface2d" else "greedy")
    if tracked is None:
        tracked = default_tracked(m)
    rng = _rng_for(master_seed, point, trial)
    seed = _seed_label(master_seed, point, trial)
    record = lifetime_trial(m, beta, decoder, t_max, check_interval, tracked, rng,
                            seed_label=seed)
    out = []
    lifetimes = []
    any_failure = False
    for name in record.tracked:
        t = record.failure_sweep[name]
        censored = t is None
        lifetimes.append(record.t_max if censored else t)
        any_failure = any_failure or not censored
        out.append(dict(kind="dynamics", family=family, linear_size=L, beta=beta,
                        seed=seed, decoder=decoder, observable=name,
                        value=record.t_max if censored else t, censored=censored,
                        extra={"abstentions": record.abstentions,
                               "check_interval": check_interval, "t_max": t_max}))
    # One aggregate row per trial: the memory fails when any tracked
    # observable first fails.
    out.append(dict(kind="dynamics", family=family, linear_size=L, beta=beta,
                    seed=seed, decoder=decoder, observable="memory_lifetime",
                    value=min(lifetimes), censored=not any_failure,
                    extra={"abstentions": record.abstentions,
                           "check_interval": check_interval, "t_max": t_max}))
    return out


def _run_dynamics(cfg: ExperimentConfig):
    rows: list[ResultRow] = []
    tasks = list(_dynamics_trial_args(cfg))
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_run_one_trial, tasks, chunksize=4))
    else:
        results = [_run_one_trial(t) for t in tasks]
    for chunk in results:
        for d in chunk:
            rows.append(ResultRow(**d))
    return rows, 0


def _run_spectrum(cfg: ExperimentConfig):
    rows = []
    refusals = 0
    point = 0
    for L in sorted(cfg.sizes):
        for eps in sorted(cfg.epsilons):
            m = _cached_model(cfg.family, L, cfg.gauge_only)
            seed = _seed_label(cfg.master_seed, point, 0)
            base = dict(kind="spectrum", family=cfg.family, linear_size=L, beta=None,
                        seed=seed, decoder="", censored=False)
            try:
                rep = ground_splitting(m, cfg.direction, eps)
                extra = {"epsilon": eps, "direction": cfg.direction,
                         "ground_degeneracy": rep.ground_degeneracy}
                rows.append(ResultRow(observable="splitting", value=rep.splitting,
                                      extra=extra, **base))
                rows.append(ResultRow(observable="gap", value=rep.gap,
                                      extra=extra, **base))
            except (ValueError, RuntimeError) as exc:
                refusals += 1
                rows.append(ResultRow(observable="splitting", value=None,
                                      extra={"refused": str(exc), "epsilon": eps},
                                      **base))
            point += 1
    return rows, refusals


# ---------------------------------------------------------------------------
# Persistence

def write_rows(rows: Sequence[ResultRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in sorted(rows, key=ResultRow.sort_key):
            writer.writerow(row.to_csv_fields())


def rows_to_csv_bytes(rows: Sequence[ResultRow]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in sorted(rows, key=ResultRow.sort_key):
        writer.writerow(row.to_csv_fields())
    return buf.getvalue().encode()


@dataclass(frozen=True)
class ParsedRow:
    kind: str
    family: str
    linear_size: int
    beta: float | None
    seed: str
    decoder: str
    observable: str
    value: float | None
    censored: bool
    extra: dict


def read_rows(path: str) -> tuple[list[ParsedRow], list[tuple[int, str]]]:
    """Parse a results CSV; malformed rows come back as (line, message)."""
    rows: list[ParsedRow] = []
    problems: list[tuple[int, str]] = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, fields in enumerate(reader, start=1):
            if lineno == 1:
                if fields != CSV_HEADER:
                    problems.append((1, f"unexpected header {fields!r}"))
                continue
            if not fields:
                continue
            if len(fields) != len(CSV_HEADER):
                problems.append((lineno, f"expected {len(CSV_HEADER)} fields, got {len(fields)}"))
                continue
            try:
                rows.append(ParsedRow(
                    kind=fields[0],
                    family=fields[1],
                    linear_size=int(fields[2]),
                    beta=float(fields[3]) if fields[3] else None,
                    seed=fields[4],
                    decoder=fields[5],
                    observable=fields[6],
                    value=float(fields[7]) if fields[7] else None,
                    censored=fields[8] == "1",
                    extra=json.loads(fields[9]) if fields[9] else {},
                ))
            except (ValueError, json.JSONDecodeError) as exc:
                problems.append((lineno, str(exc)))
    return rows, problems


# ---------------------------------------------------------------------------
# Arrhenius fitting

@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    points: tuple[tuple[float, float], ...]


def fit_arrhenius(points: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares fit of log(median lifetime) against inverse temperature."""
    betas = [p[0] for p in points]
    if len(set(betas)) < 3:
        raise ValueError("need medians at >= 3 distinct betas")
    if any(p[1] <= 0 for p in points):
        raise ValueError("medians must be positive for a log fit")
    x = np.array(betas, dtype=np.float64)
    y = np.log(np.array([p[1] for p in points], dtype=np.float64))
    xbar = x.mean()
    ybar = y.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float(((x - xbar) * (y - ybar)).sum() / sxx)
    intercept = float(ybar - slope * xbar)
    resid = y - (slope * x + intercept)
    dof = len(x) - 2
    stderr = float(math.sqrt(float((resid ** 2).sum()) / dof / sxx)) if dof > 0 else 0.0
    return FitResult(slope, intercept, stderr, tuple((float(a), float(b))
                                                     for a, b in zip(x, np.exp(y))))


def uncensored_medians(rows: Sequence[ParsedRow], family: str, linear_size: int,
                       observable: str) -> dict[float, float]:
    """Median uncensored lifetime per beta for one (family, L, observable)."""
    by_beta: dict[float, list[float]] = {}
    for r in rows:
        if (r.kind == "dynamics" and r.family == family
                and r.linear_size == linear_size and r.observable == observable
                and not r.censored and r.value is not None and r.beta is not None):
            by_beta.setdefault(r.beta, []).append(r.value)
    return {beta: float(statistics.median(vals)) for beta, vals in sorted(by_beta.items())}


# ---------------------------------------------------------------------------
# Reporting

@dataclass
class Report:
    text: str
    data: dict


def report(path: str) -> Report:
    rows, problems = read_rows(path)
    data: dict = {"problems": [{"line": ln, "message": msg} for ln, msg in problems]}
    lines = []
    if problems:
        for ln, msg in problems:
            lines.append(f"line {ln}: {msg}")

    dyn_groups: dict[tuple[str, int, str], list[ParsedRow]] = {}
    for r in rows:
        if r.kind == "dynamics":
            dyn_groups.setdefault((r.family, r.linear_size, r.observable), []).append(r)
    dynamics = []
    for (family, L, obs), group in sorted(dyn_groups.items()):
        trials = len(group)
        censored = sum(1 for r in group if r.censored)
        uncens = [r.value for r in group if not r.censored and r.value is not None]
        entry = {
            "family": family, "L": L, "observable": obs, "trials": trials,
            "censoring_rate": censored / trials,
            "median_uncensored": float(statistics.median(uncens)) if uncens else None,
        }
        medians = uncensored_medians(rows, family, L, obs)
        entry["medians_by_beta"] = {repr(b): v for b, v in medians.items()}
        if len(medians) >= 3:
            try:
                fit = fit_arrhenius(sorted(medians.items()))
                entry["arrhenius_slope"] = fit.slope
                entry["arrhenius_stderr"] = fit.stderr
            except ValueError:
                pass
        dynamics.append(entry)
        med = entry["median_uncensored"]
        lines.append(
            f"dynamics {family} L={L} {obs}: trials={trials} "
            f"censoring={entry['censoring_rate']:.0%} "
            f"median={'-' if med is None else med}"
            + (f" slope={entry['arrhenius_slope']:.3f}" if "arrhenius_slope" in entry else ""))
    data["dynamics"] = dynamics

    for kind in ("analyze", "barrier", "spectrum"):
        entries = []
        for r in rows:
            if r.kind == kind:
                entries.append({
                    "family": r.family, "L": r.linear_size, "observable": r.observable,
                    "value": r.value, "extra": r.extra,
                })
                lines.append(f"{kind} {r.family} L={r.linear_size} "
                             f"{r.observable}={r.value}")
        data[kind] = entries
    if not rows:
        lines.append("no result rows")
    return Report("\n".join(lines) + "\n", data)
