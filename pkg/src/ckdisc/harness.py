"""Experiment orchestration: validity and power grids, Monte Carlo
aggregation with Wald confidence intervals, and CSV persistence.

A grid cell is (setting, dim, balance, effect); every method in the
configuration is run on the same simulated dataset within a cell and
repetition.  Per-repetition seeds are derived from (base_seed, cell index,
repetition index), so any subset of the grid reproduces identically and the
output is independent of the degree of parallelism.
"""

from __future__ import annotations

import csv
import itertools
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .errors import APPLICABILITY_ERRORS, ConfigError, CsvParseError
from .pipeline import Dataset, METHODS, run_test
from .sims import SETTINGS, SimulationConfig
from . import rng as _rng

VALIDITY_BALANCES = tuple(np.round(np.linspace(0.2, 1.0, 10), 10))
POWER_BALANCES = (0.4, 0.8)
POWER_EFFECTS = tuple(np.round(np.arange(0.0, 1.0001, 0.125), 10))


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str  # "validity" or "power"
    settings: tuple = ("sigmoidal", "nonmonotone", "kgroup", "heteroskedastic")
    dims: tuple = (10, 101)
    balances: tuple = None
    effects: tuple = None
    methods: tuple = METHODS
    repetitions: int = None
    alpha: float = 0.05
    n: int = 100
    n_replicates: int = 1000
    ci_level: float = 0.90
    base_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("validity", "power"):
            raise ConfigError("kind must be 'validity' or 'power'")
        for s in self.settings:
            if s not in SETTINGS:
                raise ConfigError(f"unknown setting {s!r}")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}")
        if self.balances is None:
            grid = VALIDITY_BALANCES if self.kind == "validity" else POWER_BALANCES
            object.__setattr__(self, "balances", grid)
        if self.effects is None:
            grid = (0.0,) if self.kind == "validity" else POWER_EFFECTS
            object.__setattr__(self, "effects", grid)
        if self.repetitions is None:
            object.__setattr__(self, "repetitions", 100 if self.kind == "validity" else 200)
        if not self.settings or not self.balances or not self.effects or not self.methods:
            raise ConfigError("grids must be nonempty")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha must be in (0, 1)")


@dataclass(frozen=True)
class PowerCurveRow:
    setting: str
    dim: int
    balance: float
    effect: float
    method: str
    rate: float
    ci_low: float
    ci_high: float
    n_applicable: int
    n_errors: int


@dataclass(frozen=True)
class PowerCurve:
    rows: tuple  # PowerCurveRow, one per (setting, dim, balance, effect, method)


def wald_ci(successes: int, trials: int, level: float = 0.90):
    """Normal-approximation confidence interval for a proportion, clipped to [0, 1]."""
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    if not 0.0 < level < 1.0:
        raise ConfigError("level must be in (0, 1)")
    p = successes / trials
    z = float(norm.ppf((1.0 + level) / 2.0))
    half = z * np.sqrt(p * (1.0 - p) / trials)
    return max(0.0, p - half), min(1.0, p + half)


def _cells(cfg: ExperimentConfig):
    return list(itertools.product(cfg.settings, cfg.dims, cfg.balances, cfg.effects))


def _run_cell_rep(cfg: ExperimentConfig, cell_idx: int, cell, rep: int):
    """One repetition of one grid cell: simulate once, run every method.

    Returns {method: "reject" | "accept" | "error"}.
    """
    from .sims import simulate  # local import keeps worker pickling light

    setting, dim, balance, effect = cell
    sim_cfg = SimulationConfig(
        setting=setting,
        n=cfg.n,
        D=dim,
        K=3 if setting == "kgroup" else 2,
        balance=balance,
        effect=effect,
    )
    sample = simulate(sim_cfg, _rng.derive(cfg.base_seed, cell_idx, rep, 0))
    outcomes = {}
    for m_idx, method in enumerate(cfg.methods):
        seed = _rng.derive(cfg.base_seed, cell_idx, rep, 1 + m_idx)
        try:
            result, _ = run_test(
                sample.dataset, method, n_replicates=cfg.n_replicates, rng=seed
            )
        except APPLICABILITY_ERRORS:
            outcomes[method] = "error"
            continue
        outcomes[method] = "reject" if result.p_value <= cfg.alpha else "accept"
    return outcomes


def run_experiment(cfg: ExperimentConfig, n_workers: int = None) -> PowerCurve:
    """Run the full grid and aggregate rejection rates with Wald CIs.

    Methods raising applicability errors in a cell are counted under
    n_errors; the rate is computed over the applicable repetitions only.
    """
    cells = _cells(cfg)
    tasks = [(idx, cell, rep) for idx, cell in enumerate(cells) for rep in range(cfg.repetitions)]
    if n_workers is None:
        n_workers = default_workers()
    if n_workers > 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=n_workers)(
            delayed(_run_cell_rep)(cfg, idx, cell, rep) for idx, cell, rep in tasks
        )
    else:
        results = [_run_cell_rep(cfg, idx, cell, rep) for idx, cell, rep in tasks]

    # Aggregation is commutative counting, so task order never matters.
    counts = {}
    for (idx, _cell, _rep), outcome in zip(tasks, results):
        for method, verdict in outcome.items():
            rejects, applicable, errors = counts.get((idx, method), (0, 0, 0))
            if verdict == "error":
                errors += 1
            else:
                applicable += 1
                rejects += verdict == "reject"
            counts[(idx, method)] = (rejects, applicable, errors)

    rows = []
    for idx, (setting, dim, balance, effect) in enumerate(cells):
        for method in cfg.methods:
            rejects, applicable, errors = counts[(idx, method)]
            if applicable > 0:
                rate = rejects / applicable
                low, high = wald_ci(rejects, applicable, cfg.ci_level)
            else:
                rate, low, high = 0.0, 0.0, 0.0
            rows.append(
                PowerCurveRow(
                    setting=setting,
                    dim=dim,
                    balance=float(balance),
                    effect=float(effect),
                    method=method,
                    rate=rate,
                    ci_low=low,
                    ci_high=high,
                    n_applicable=applicable,
                    n_errors=errors,
                )
            )
    return PowerCurve(rows=tuple(rows))


def default_workers() -> int:
    env = os.environ.get("CKDISC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"CKDISC_THREADS is not an integer: {env!r}")
    return 1


RESULTS_HEADER = [
    "setting", "dim", "balance", "effect", "method",
    "rate", "ci_low", "ci_high", "n_applicable", "n_errors",
]


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def export_results(curve: PowerCurve, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RESULTS_HEADER)
        for r in curve.rows:
            writer.writerow(
                [r.setting, r.dim, _fmt(r.balance), _fmt(r.effect), r.method,
                 _fmt(r.rate), _fmt(r.ci_low), _fmt(r.ci_high),
                 r.n_applicable, r.n_errors]
            )


def import_results(path) -> PowerCurve:
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CsvParseError("empty file", line=1)
        if header != RESULTS_HEADER:
            missing = sorted(set(RESULTS_HEADER) - set(header))
            raise CsvParseError(f"header mismatch; missing columns {missing}", line=1)
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(RESULTS_HEADER):
                raise CsvParseError("wrong field count", line=lineno)
            try:
                rows.append(
                    PowerCurveRow(
                        setting=rec[0], dim=int(rec[1]), balance=float(rec[2]),
                        effect=float(rec[3]), method=rec[4], rate=float(rec[5]),
                        ci_low=float(rec[6]), ci_high=float(rec[7]),
                        n_applicable=int(rec[8]), n_errors=int(rec[9]),
                    )
                )
            except ValueError as exc:
                raise CsvParseError(str(exc), line=lineno)
    return PowerCurve(rows=tuple(rows))


def export_dataset(data: Dataset, path) -> None:
    """Write a dataset as CSV: sample_id,group,x_1..x_r,y_1..y_D."""
    r = data.covariates.shape[1]
    d = data.outcomes.shape[1]
    header = (
        ["sample_id", "group"]
        + [f"x_{j}" for j in range(1, r + 1)]
        + [f"y_{j}" for j in range(1, d + 1)]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(data.n):
            writer.writerow(
                [i, int(data.groups[i])]
                + [_fmt(v) for v in data.covariates[i]]
                + [_fmt(v) for v in data.outcomes[i]]
            )


def import_dataset(path) -> Dataset:
    """Read a dataset written by export_dataset; lossless round trip."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CsvParseError("empty file", line=1)
        if len(header) < 4 or header[:2] != ["sample_id", "group"]:
            raise CsvParseError(
                "header must start with sample_id,group followed by x_*,y_* columns",
                line=1,
            )
        x_cols = [i for i, name in enumerate(header) if name.startswith("x_")]
        y_cols = [i for i, name in enumerate(header) if name.startswith("y_")]
        if not x_cols:
            raise CsvParseError("header mismatch; missing column x_1", line=1)
        if not y_cols:
            raise CsvParseError("header mismatch; missing column y_1", line=1)
        groups, xs, ys = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise CsvParseError("wrong field count", line=lineno)
            try:
                groups.append(int(rec[1]))
                xs.append([float(rec[i]) for i in x_cols])
                ys.append([float(rec[i]) for i in y_cols])
            except ValueError as exc:
                raise CsvParseError(str(exc), line=lineno)
    if not groups:
        raise CsvParseError("no data rows", line=2)
    return Dataset(
        outcomes=np.array(ys), groups=np.array(groups), covariates=np.array(xs)
    )
