"""Seeded Monte Carlo harness comparing the selection strategies.

Every (K_T, trial) pair gets one channel draw, seeded by hashing the master
seed with ``K_T`` and the trial index. That same draw is used for every
algorithm at every SNR (SNR only rescales the noise variance, ``P = 1``).
"""

from __future__ import annotations

import configparser
import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .align import VALIDITY_THRESHOLD
from .exceptions import IAError, InvalidConfig, SearchSpaceTooLarge
from .flops import FLOP_MODELS, FlopParams
from .select import (
    DEFAULT_BRUTE_CAP,
    Scenario,
    brute_force_select,
    o_algorithm,
    s_algorithm,
    search_space_size,
)
from .system import SystemConfig, generate_channels, trial_seed, validate_config

log = logging.getLogger(__name__)

ALGORITHMS = ("brute", "s", "o")
TRIAL_HEADER = ["k_t", "snr_db", "algorithm", "trial", "seed",
                "sum_rate_bits", "residual", "rate_evals", "flagged"]
AGGREGATE_HEADER = ["k_t", "snr_db", "algorithm", "mean_rate", "stderr", "n", "flops_model"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentSpec:
    base: SystemConfig
    snr_db_list: tuple[float, ...]
    users_sweep: tuple[int, ...]
    num_trials: int = 200
    master_seed: int = 0
    algorithms: tuple[str, ...] = ALGORITHMS
    brute_cap: int = DEFAULT_BRUTE_CAP

    def config_for(self, k_t: int, snr_db: float | None = None) -> SystemConfig:
        cfg = self.base.with_users(k_t)
        if snr_db is not None:
            cfg = cfg.with_noise(self.base.bs_power / 10.0 ** (snr_db / 10.0))
        return cfg

    def brute_enabled(self, k_t: int) -> bool:
        b = self.base
        return ("brute" in self.algorithms
                and search_space_size(k_t, b.K, b.L) <= self.brute_cap)


@dataclass(frozen=True)
class TrialRecord:
    k_t: int
    snr_db: float
    algorithm: str
    trial_index: int
    seed: int
    sum_rate_bits: float
    residual: float
    rate_evaluations: int
    flagged: bool


@dataclass(frozen=True)
class AggregateRow:
    k_t: int
    snr_db: float
    algorithm: str
    mean_rate: float
    stderr: float
    n: int
    flops_model: int


# config files ---------------------------------------------------------------

_INT_KEYS = ("num_cells", "select_per_cell", "tx_antennas", "rx_antennas", "streams_per_user")


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.split(",") if x.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.split(",") if x.strip())


def parse_spec(text: str) -> ExperimentSpec:
    """Parse a flat ``key = value`` experiment file (``#`` starts a comment)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    raw = dict(parser["experiment"])
    known = set(_INT_KEYS) | {"bs_power", "snr_db", "users", "trials", "seed",
                              "algorithms", "brute_cap"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError(f"unknown keys: {', '.join(unknown)}")
    missing = [k for k in (*_INT_KEYS, "snr_db", "users") if k not in raw]
    if missing:
        raise ConfigError(f"missing keys: {', '.join(missing)}")
    try:
        users = _int_list(raw["users"])
        base = SystemConfig(
            num_cells=int(raw["num_cells"]),
            users_per_cell=max(users) if users else 0,
            select_per_cell=int(raw["select_per_cell"]),
            tx_antennas=int(raw["tx_antennas"]),
            rx_antennas=int(raw["rx_antennas"]),
            streams_per_user=int(raw["streams_per_user"]),
            bs_power=float(raw.get("bs_power", "1.0")),
        )
        spec = ExperimentSpec(
            base=base,
            snr_db_list=_float_list(raw["snr_db"]),
            users_sweep=users,
            num_trials=int(raw.get("trials", "200")),
            master_seed=int(raw.get("seed", "0")),
            algorithms=tuple(a.strip() for a in raw.get("algorithms", "brute,s,o").split(",")
                             if a.strip()),
            brute_cap=int(float(raw.get("brute_cap", str(DEFAULT_BRUTE_CAP)))),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    check_spec(spec)
    return spec


def load_spec(path) -> ExperimentSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_spec(text)


def check_spec(spec: ExperimentSpec) -> None:
    problems = []
    if spec.num_trials < 1:
        problems.append("trials must be >= 1")
    if not spec.users_sweep:
        problems.append("users list is empty")
    if not spec.snr_db_list:
        problems.append("snr_db list is empty")
    if not 0 <= spec.master_seed < 2**64:
        problems.append("seed must be a 64-bit unsigned integer")
    bad = [a for a in spec.algorithms if a not in ALGORITHMS]
    if bad or not spec.algorithms:
        problems.append(f"algorithms must be a non-empty subset of {','.join(ALGORITHMS)}")
    if problems:
        raise ConfigError("; ".join(problems))
    for k_t in spec.users_sweep:
        violations = validate_config(spec.config_for(k_t))
        if violations:
            raise InvalidConfig([f"K_T={k_t}:{v}" for v in violations])


# running --------------------------------------------------------------------

def run_trial(spec: ExperimentSpec, k_t: int, trial: int) -> list[TrialRecord]:
    """All algorithms at all SNRs on one shared channel draw."""
    seed = trial_seed(spec.master_seed, k_t, trial)
    sc = Scenario(generate_channels(spec.config_for(k_t), seed))
    residuals = {}

    def residual(subsets):
        if subsets not in residuals:
            try:
                residuals[subsets] = sc.residual(subsets)
            except IAError:
                residuals[subsets] = math.inf
        return residuals[subsets]

    records = []
    for snr_db in spec.snr_db_list:
        noise_var = spec.config_for(k_t, snr_db).noise_var
        for alg in spec.algorithms:
            if alg == "brute":
                if not spec.brute_enabled(k_t):
                    continue
                sel, evals = brute_force_select(sc, noise_var, cap=spec.brute_cap)
            elif alg == "s":
                sel, trace = s_algorithm(sc, noise_var)
                evals = trace.rate_evaluations
            else:
                sel, trace = o_algorithm(sc, noise_var)
                evals = trace.rate_evaluations
            res = residual(sel.subsets)
            records.append(TrialRecord(
                k_t=k_t, snr_db=snr_db, algorithm=alg, trial_index=trial, seed=seed,
                sum_rate_bits=sel.achieved_rate, residual=res, rate_evaluations=evals,
                flagged=not res <= VALIDITY_THRESHOLD,
            ))
    return records


def _run_job(args):
    spec, k_t, trial = args
    return run_trial(spec, k_t, trial)


def _sort_key(spec: ExperimentSpec):
    users = {k: i for i, k in enumerate(spec.users_sweep)}
    snrs = {s: i for i, s in enumerate(spec.snr_db_list)}
    algs = {a: i for i, a in enumerate(spec.algorithms)}
    return lambda r: (users[r.k_t], snrs[r.snr_db], algs[r.algorithm], r.trial_index)


def run_experiment(
    spec: ExperimentSpec, workers: int = 1
) -> tuple[list[TrialRecord], list[AggregateRow]]:
    """Run every trial and aggregate; output order is independent of `workers`."""
    check_spec(spec)
    if "brute" in spec.algorithms and not any(spec.brute_enabled(k) for k in spec.users_sweep):
        b = spec.base
        raise SearchSpaceTooLarge(search_space_size(min(spec.users_sweep), b.K, b.L),
                                  spec.brute_cap)
    for k_t in spec.users_sweep:
        if "brute" in spec.algorithms and not spec.brute_enabled(k_t):
            log.info("brute force skipped at K_T=%d (search space above cap %d)",
                     k_t, spec.brute_cap)
    jobs = [(spec, k_t, t) for k_t in spec.users_sweep for t in range(spec.num_trials)]
    records: list[TrialRecord] = []
    if workers <= 1:
        for job in jobs:
            records.extend(_run_job(job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))):
                records.extend(chunk)
    records.sort(key=_sort_key(spec))
    return records, aggregate(spec, records)


def aggregate(spec: ExperimentSpec, records: Iterable[TrialRecord]) -> list[AggregateRow]:
    """Mean and standard error of unflagged trials per (K_T, SNR, algorithm)."""
    groups: dict[tuple, list[float]] = {}
    for r in records:
        if not r.flagged:
            groups.setdefault((r.k_t, r.snr_db, r.algorithm), []).append(r.sum_rate_bits)
    b = spec.base
    rows = []
    for k_t in spec.users_sweep:
        for snr_db in spec.snr_db_list:
            for alg in spec.algorithms:
                vals = groups.get((k_t, snr_db, alg), [])
                n = len(vals)
                mean = math.fsum(vals) / n if n else math.nan
                if n > 1:
                    var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1)
                    stderr = math.sqrt(var / n)
                else:
                    stderr = math.nan
                flops = FLOP_MODELS[alg](FlopParams(b.M, b.N, b.K, b.L, k_t, b.d_s))
                rows.append(AggregateRow(k_t, snr_db, alg, mean, stderr, n, flops))
    return rows


# output ---------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_NONE, escapechar=None)
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_results(
    records: Sequence[TrialRecord],
    aggregates: Sequence[AggregateRow],
    out_dir,
    spec: ExperimentSpec | None = None,
) -> dict[str, Path]:
    """Write ``trials.csv`` and ``aggregate.csv`` (plus ``metadata.json`` given a spec)."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    paths = {"trials": out / "trials.csv", "aggregate": out / "aggregate.csv"}
    _write_csv(paths["trials"], TRIAL_HEADER, (
        (r.k_t, r.snr_db, r.algorithm, r.trial_index, r.seed, r.sum_rate_bits,
         r.residual, r.rate_evaluations, r.flagged) for r in records))
    _write_csv(paths["aggregate"], AGGREGATE_HEADER, (
        (a.k_t, a.snr_db, a.algorithm, a.mean_rate, a.stderr, a.n, a.flops_model)
        for a in aggregates))
    if spec is not None:
        paths["metadata"] = out / "metadata.json"
        meta = {
            "spec": asdict(spec),
            "shared_channel_draws": True,
            "channel_seed": "numpy SeedSequence([master_seed, k_t, trial]) -> PCG64",
            "snr_definition": "SNR = bs_power / noise_var",
            "validity_threshold": VALIDITY_THRESHOLD,
            "brute_enabled_k_t": [k for k in spec.users_sweep if spec.brute_enabled(k)],
        }
        paths["metadata"].write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                     encoding="utf-8")
    return paths


def with_overrides(spec: ExperimentSpec, trials=None, seed=None, algorithms=None) -> ExperimentSpec:
    changes = {}
    if trials is not None:
        changes["num_trials"] = trials
    if seed is not None:
        changes["master_seed"] = seed
    if algorithms is not None:
        changes["algorithms"] = tuple(algorithms)
    spec = replace(spec, **changes)
    check_spec(spec)
    return spec
