"""Conditional MANOVA: nested multivariate linear models compared via the
Pillai-Bartlett trace with the classical F approximation.

The null model regresses outcomes on [intercept, covariates]; the
alternative adds group indicators and group-by-covariate interactions.
The hypothesis SSCP is the extra residual SSCP of the null over the
alternative, and the trace statistic V = tr(H (H + E)^-1) is rescaled to an
approximately F-distributed quantity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import f as f_dist

from .errors import HdlssError, InvalidInputError, SingularDesignError


@dataclass(frozen=True)
class LinearModelFit:
    coefficients: np.ndarray  # (predictors, D)
    residuals: np.ndarray  # (n, D)
    residual_sscp: np.ndarray  # (D, D)
    df_residual: int


@dataclass(frozen=True)
class CmanovaResult:
    pillai_trace: float
    f_statistic: float
    df1: int
    df2: int
    p_value: float


def fit_mlm(y, design) -> LinearModelFit:
    """QR-based least squares fit of a multivariate linear model."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(design, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    n, m = x.shape
    if y.shape[0] != n:
        raise InvalidInputError("y and design must have equal row counts")
    if np.linalg.matrix_rank(x) < m:
        raise SingularDesignError("design matrix is rank deficient")
    if n <= m:
        raise InvalidInputError("need more samples than predictors")
    d = y.shape[1]
    df_residual = n - m
    if d > df_residual:
        raise HdlssError(
            f"outcome dimension {d} exceeds residual degrees of freedom {df_residual}"
        )
    coef, *_ = np.linalg.lstsq(x, y, rcond=None)
    resid = y - x @ coef
    return LinearModelFit(
        coefficients=coef,
        residuals=resid,
        residual_sscp=resid.T @ resid,
        df_residual=df_residual,
    )


def _designs(t, x):
    """Null and alternative design matrices for the nested comparison."""
    t = np.asarray(t)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = t.shape[0]
    labels = np.unique(t)
    if labels.size < 2:
        raise InvalidInputError("need at least 2 groups")
    for lab in labels:
        if (t == lab).sum() < 2:
            raise InvalidInputError(f"group {lab} has fewer than 2 samples")
    null = np.column_stack([np.ones(n), x])
    # Indicators for all but the first group, plus their covariate interactions.
    extras = []
    for lab in labels[1:]:
        ind = (t == lab).astype(float)
        extras.append(ind[:, None])
        extras.append(ind[:, None] * x)
    alt = np.column_stack([null] + extras)
    q = alt.shape[1] - null.shape[1]
    return null, alt, q


def cmanova_test(y, t, x) -> CmanovaResult:
    """Test for group effects (offsets or interactions) on multivariate outcomes."""
    y = np.asarray(y, dtype=float)
    if y.ndim == 1:
        y = y[:, None]
    null_design, alt_design, q = _designs(t, x)
    fit_alt = fit_mlm(y, alt_design)
    fit_null = fit_mlm(y, null_design)

    d = y.shape[1]
    h = fit_null.residual_sscp - fit_alt.residual_sscp
    e0 = fit_null.residual_sscp  # H + E
    v = float(np.trace(h @ np.linalg.pinv(e0)))

    s = min(d, q)
    m_prime = (abs(d - q) - 1) / 2.0
    n_prime = (fit_alt.df_residual - d - 1) / 2.0
    df1 = int(round(s * (2 * m_prime + s + 1)))
    df2 = int(round(s * (2 * n_prime + s + 1)))
    v = float(np.clip(v, 0.0, s))
    if v >= s:
        f_stat = np.inf
    else:
        f_stat = (v / (s - v)) * ((2 * n_prime + s + 1) / (2 * m_prime + s + 1))
    p = float(f_dist.sf(f_stat, df1, df2)) if np.isfinite(f_stat) else 0.0
    return CmanovaResult(
        pillai_trace=v, f_statistic=float(f_stat), df1=df1, df2=df2, p_value=p
    )
