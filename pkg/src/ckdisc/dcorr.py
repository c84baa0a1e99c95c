"""Unconditional distance correlation and its permutation test.

The statistic is the classical biased (V-statistic) distance correlation:
double-center both distance matrices and normalize the centered product by
the geometric mean of the two centered sums of squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .distances import double_center, pairwise_euclidean
from .errors import InvalidInputError, TooFewSamplesError
from . import rng as _rng

VARIANCE_TOL = 1e-14


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p_value: float
    n_replicates: int
    method: str


def dcorr_statistic(dy, dv) -> float:
    """Distance correlation between two precomputed distance matrices."""
    dy = np.asarray(dy, dtype=float)
    dv = np.asarray(dv, dtype=float)
    if dy.shape != dv.shape or dy.ndim != 2 or dy.shape[0] != dy.shape[1]:
        raise InvalidInputError("distance matrices must be square and of equal size")
    a = double_center(dy)
    b = double_center(dv)
    vary = float((a * a).sum())
    varv = float((b * b).sum())
    if vary <= VARIANCE_TOL or varv <= VARIANCE_TOL:
        return 0.0
    stat = float((a * b).sum()) / np.sqrt(vary * varv)
    return float(np.clip(stat, 0.0, 1.0))


def _permuted(d, perm) -> np.ndarray:
    # Distance matrix of the row-permuted sample.
    return d[np.ix_(perm, perm)]


def permutation_p_value(observed: float, null_stats) -> float:
    """(1 + #{null >= observed}) / (1 + replicates); ties count as exceedances."""
    null_stats = np.asarray(null_stats, dtype=float)
    return float((1 + int((null_stats >= observed).sum())) / (1 + null_stats.size))


def dcorr_test(y, v, n_replicates: int = 1000, rng=None) -> TestResult:
    """Permutation test of independence between two samples.

    Each replicate permutes the rows of v uniformly; replicate r draws from
    a stream derived from (rng, r).
    """
    dy = pairwise_euclidean(y)
    dv = pairwise_euclidean(v)
    n = dy.shape[0]
    if dv.shape[0] != n:
        raise InvalidInputError("y and v must have equal row counts")
    if n < 4:
        raise TooFewSamplesError(f"need at least 4 samples, got {n}")
    if n_replicates < 1:
        raise InvalidInputError("n_replicates must be >= 1")

    observed = dcorr_statistic(dy, dv)
    null = np.empty(n_replicates)
    for r, g in enumerate(_rng.replicate_rngs(rng, n_replicates)):
        perm = g.permutation(n)
        null[r] = dcorr_statistic(dy, _permuted(dv, perm))
    return TestResult(
        statistic=observed,
        p_value=permutation_p_value(observed, null),
        n_replicates=n_replicates,
        method="dcorr",
    )
