"""Command-line interface: simulate datasets, run a single test on a CSV,
or run a full validity/power experiment grid.

Exit codes: 0 on success, 1 on usage errors, 2 on typed applicability
errors (e.g. a parametric test in a regime where it is undefined).
"""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from . import harness
from .errors import APPLICABILITY_ERRORS, CkdiscError, CsvParseError
from .pipeline import Dataset, METHODS, run_test
from .sims import SETTINGS, SimulationConfig, simulate


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ckdisc",
        description="K-sample causal conditional discrepancy testing",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic dataset CSV")
    sim.add_argument("--setting", required=True, choices=SETTINGS)
    sim.add_argument("--n", type=int, default=100)
    sim.add_argument("--d", type=int, default=10)
    sim.add_argument("--k", type=int, default=None)
    sim.add_argument("--balance", type=float, default=1.0)
    sim.add_argument("--effect", type=float, default=0.0)
    sim.add_argument("--q", type=float, default=None)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--no-rotate", action="store_true")
    sim.add_argument("--out", required=True)

    test = sub.add_parser("test", help="run one test on a dataset CSV")
    test.add_argument("--method", required=True, choices=METHODS)
    test.add_argument("--data", required=True)
    test.add_argument("--outcome-cols", required=True,
                      help="comma-separated outcome column names")
    test.add_argument("--group-col", required=True)
    test.add_argument("--covariate-cols", default="",
                      help="comma-separated covariate column names")
    test.add_argument("--replicates", type=int, default=1000)
    test.add_argument("--seed", type=int, default=0)
    test.add_argument("--block-size", type=int, default=5)
    test.add_argument("--bandwidth", default="auto")

    exp = sub.add_parser("experiment", help="run a validity or power grid")
    exp.add_argument("--kind", required=True, choices=("validity", "power"))
    exp.add_argument("--settings", default=None,
                     help="comma-separated subset of simulation settings")
    exp.add_argument("--dims", default=None, help="comma-separated dimensions")
    exp.add_argument("--balances", default=None, help="comma-separated balances")
    exp.add_argument("--effects", default=None, help="comma-separated effect sizes")
    exp.add_argument("--methods", default=None, help="comma-separated methods")
    exp.add_argument("--reps", type=int, default=None)
    exp.add_argument("--alpha", type=float, default=0.05)
    exp.add_argument("--n", type=int, default=100)
    exp.add_argument("--replicates", type=int, default=1000)
    exp.add_argument("--seed", type=int, default=0)
    exp.add_argument("--threads", type=int, default=None)
    exp.add_argument("--out", required=True)
    return parser


def _read_columns(path, outcome_cols, group_col, covariate_cols) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CsvParseError("empty file", line=1)
        index = {name: i for i, name in enumerate(header)}
        for name in [*outcome_cols, group_col, *covariate_cols]:
            if name not in index:
                raise CsvParseError(f"header mismatch; missing column {name!r}", line=1)
        groups, ys, xs = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise CsvParseError("wrong field count", line=lineno)
            try:
                groups.append(int(float(rec[index[group_col]])))
                ys.append([float(rec[index[c]]) for c in outcome_cols])
                xs.append([float(rec[index[c]]) for c in covariate_cols])
            except ValueError as exc:
                raise CsvParseError(str(exc), line=lineno)
    if not groups:
        raise CsvParseError("no data rows", line=2)
    if not covariate_cols:
        # Covariate-free data still needs the field; use a zero column.
        xs = [[0.0] for _ in groups]
    return Dataset(outcomes=np.array(ys), groups=np.array(groups), covariates=np.array(xs))


def _split(value, cast=str):
    return tuple(cast(part) for part in value.split(",") if part)


def _cmd_simulate(args) -> int:
    cfg = SimulationConfig(
        setting=args.setting,
        n=args.n,
        D=args.d,
        K=args.k if args.k is not None else (3 if args.setting == "kgroup" else 2),
        balance=args.balance,
        effect=args.effect,
        q=args.q,
        rotate=not args.no_rotate,
        seed=args.seed,
    )
    sample = simulate(cfg)
    harness.export_dataset(sample.dataset, args.out)
    print(f"wrote {sample.dataset.n} samples to {args.out}")
    return 0


def _cmd_test(args) -> int:
    data = _read_columns(
        args.data,
        _split(args.outcome_cols),
        args.group_col,
        _split(args.covariate_cols),
    )
    bandwidth = args.bandwidth if args.bandwidth == "auto" else float(args.bandwidth)
    result, match = run_test(
        data,
        args.method,
        n_replicates=args.replicates,
        block_size=args.block_size,
        bandwidth=bandwidth,
        rng=args.seed,
    )
    retained = match.retained.size if match is not None else data.n
    print(f"statistic={result.statistic:.6g} p={result.p_value:.6g} "
          f"retained={retained}/{data.n}")
    return 0


def _cmd_experiment(args) -> int:
    kwargs = {"kind": args.kind, "alpha": args.alpha, "n": args.n,
              "n_replicates": args.replicates, "base_seed": args.seed}
    if args.settings:
        kwargs["settings"] = _split(args.settings)
    if args.dims:
        kwargs["dims"] = _split(args.dims, int)
    if args.balances:
        kwargs["balances"] = _split(args.balances, float)
    if args.effects:
        kwargs["effects"] = _split(args.effects, float)
    if args.methods:
        kwargs["methods"] = _split(args.methods)
    if args.reps is not None:
        kwargs["repetitions"] = args.reps
    cfg = harness.ExperimentConfig(**kwargs)
    curve = harness.run_experiment(cfg, n_workers=args.threads)
    harness.export_results(curve, args.out)
    print(f"wrote {len(curve.rows)} rows to {args.out}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "test":
            return _cmd_test(args)
        return _cmd_experiment(args)
    except APPLICABILITY_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CkdiscError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
