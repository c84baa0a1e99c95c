"""End-to-end causal conditional discrepancy testing and the unified
test dispatch.

The causal pipeline one-hot encodes group labels, fits generalized
propensity scores on the full sample, trims to the vector-matching overlap
region, and runs the conditional distance correlation test on the retained
subsample.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cdcorr import CdcorrConfig, cdcorr_test
from .cmanova import cmanova_test
from .dcorr import TestResult, dcorr_test
from .errors import InsufficientOverlapError, InvalidInputError
from .matching import MatchFilter, fit_multinomial, predict_propensities, vector_match

MIN_RETAINED = 10

METHODS = ("dcorr", "cdcorr", "causal-cdcorr", "cmanova")


@dataclass(frozen=True)
class Dataset:
    outcomes: np.ndarray  # (n, D)
    groups: np.ndarray  # n labels in 1..K
    covariates: np.ndarray  # (n, r)

    def __post_init__(self):
        y = np.asarray(self.outcomes, dtype=float)
        t = np.asarray(self.groups)
        x = np.asarray(self.covariates, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if x.ndim == 1:
            x = x[:, None]
        n = y.shape[0]
        if t.shape[0] != n or x.shape[0] != n:
            raise InvalidInputError("outcomes, groups, and covariates disagree on n")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise InvalidInputError("non-finite entries in dataset")
        if np.unique(t).size < 2:
            raise InvalidInputError("need at least 2 distinct group labels")
        if int(np.min(t)) < 1:
            raise InvalidInputError("group labels are 1-based")
        object.__setattr__(self, "outcomes", y)
        object.__setattr__(self, "groups", t)
        object.__setattr__(self, "covariates", x)

    @property
    def n(self) -> int:
        return self.outcomes.shape[0]

    @property
    def n_groups(self) -> int:
        return int(np.unique(self.groups).size)

    @property
    def K(self) -> int:
        """Number of treatment levels (largest 1-based label)."""
        return int(np.max(self.groups))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            outcomes=self.outcomes[idx],
            groups=self.groups[idx],
            covariates=self.covariates[idx],
        )


def one_hot(groups, K: int) -> np.ndarray:
    """n x K indicator matrix; label t maps to a 1 in column t (1-based)."""
    t = np.asarray(groups)
    if not np.issubdtype(t.dtype, np.integer):
        t = t.astype(int)
    if t.min() < 1 or t.max() > K:
        raise InvalidInputError(f"group labels must lie in 1..{K}")
    out = np.zeros((t.shape[0], K))
    out[np.arange(t.shape[0]), t - 1] = 1.0
    return out


def causal_cdcorr_test(data: Dataset, cfg: CdcorrConfig = CdcorrConfig(), rng=None):
    """Vector-matching trim followed by the conditional distance correlation
    test of outcomes against one-hot group labels given covariates.

    Propensities are fit on the full sample; the trimmed subsample is tested
    without reweighting.  Returns (TestResult, MatchFilter).
    """
    model = fit_multinomial(data.covariates, data.groups)
    scores = predict_propensities(model, data.covariates)
    match = vector_match(scores, data.groups)
    if match.retained.size < MIN_RETAINED:
        raise InsufficientOverlapError(
            f"only {match.retained.size} samples retained after vector matching"
        )
    sub = data.subset(match.retained)
    v = one_hot(sub.groups, data.K)
    result = cdcorr_test(sub.outcomes, v, sub.covariates, cfg, rng)
    result = TestResult(
        statistic=result.statistic,
        p_value=result.p_value,
        n_replicates=result.n_replicates,
        method="causal-cdcorr",
    )
    return result, match


def run_test(
    data: Dataset,
    method: str,
    n_replicates: int = 1000,
    block_size: int = 5,
    bandwidth="auto",
    rng=None,
):
    """Uniform dispatch over the supported tests.

    Returns (TestResult, MatchFilter or None).  dcorr ignores covariates
    entirely; cmanova is deterministic and reports no replicates.
    """
    if method not in METHODS:
        raise InvalidInputError(f"unknown method {method!r}; expected one of {METHODS}")
    k = data.K
    if method == "dcorr":
        v = one_hot(data.groups, k)
        return dcorr_test(data.outcomes, v, n_replicates, rng), None
    if method == "cdcorr":
        v = one_hot(data.groups, k)
        cfg = CdcorrConfig(
            bandwidth=bandwidth, n_replicates=n_replicates, block_size=block_size
        )
        return cdcorr_test(data.outcomes, v, data.covariates, cfg, rng), None
    if method == "causal-cdcorr":
        cfg = CdcorrConfig(
            bandwidth=bandwidth, n_replicates=n_replicates, block_size=block_size
        )
        return causal_cdcorr_test(data, cfg, rng)
    res = cmanova_test(data.outcomes, data.groups, data.covariates)
    return (
        TestResult(
            statistic=res.pillai_trace,
            p_value=res.p_value,
            n_replicates=0,
            method="cmanova",
        ),
        None,
    )
