"""Generalized propensity scores via baseline-category multinomial logit,
and vector matching (propensity overlap trimming).

The multinomial model is fit by Newton iterations on the full
log-likelihood with a small ridge on the Hessian; the last group label is
the baseline category and an intercept column is always prepended.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyOverlapError, InvalidInputError, SeparationWarning

SEPARATION_COEF_NORM = 30.0


@dataclass(frozen=True)
class PropensityModel:
    coefficients: np.ndarray  # (K-1, r+1), row l for group labels[l] vs baseline
    labels: np.ndarray  # sorted distinct group labels, length K
    baseline: object  # labels[-1]
    converged: bool
    n_iterations: int
    separation: bool = False


@dataclass(frozen=True)
class MatchFilter:
    low: np.ndarray  # l(t), length K
    high: np.ndarray  # h(t), length K
    retained: np.ndarray  # sorted retained sample indices


def _design(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    return np.column_stack([np.ones(x.shape[0]), x])


def _probabilities(coef, xd) -> np.ndarray:
    """Softmax over baseline-anchored linear predictors, overflow-safe."""
    eta = xd @ coef.T  # (n, K-1)
    full = np.column_stack([eta, np.zeros(eta.shape[0])])  # baseline logit 0
    full -= full.max(axis=1, keepdims=True)
    ex = np.exp(full)
    return ex / ex.sum(axis=1, keepdims=True)


def _log_likelihood_grad(coef, xd, onehot):
    p = _probabilities(coef, xd)
    # Gradient wrt the non-baseline coefficient rows only.
    return (onehot[:, :-1] - p[:, :-1]).T @ xd


def fit_multinomial(x, t, max_iter: int = 100, tol: float = 1e-8) -> PropensityModel:
    """Maximum-likelihood fit of the baseline-category logit model.

    Newton steps use a 1e-8 ridge on the Hessian for rank safety.  Suspected
    perfect separation (large coefficients with a non-vanishing gradient) is
    flagged with a warning, not an error: matching only needs score order.
    """
    t = np.asarray(t)
    xd = _design(x)
    n, m = xd.shape
    labels = np.unique(t)
    k = labels.size
    if k < 2:
        raise InvalidInputError("need at least 2 groups")
    for lab in labels:
        if not (t == lab).any():
            raise InvalidInputError(f"group {lab} is empty")
    if n <= k * m:
        raise InvalidInputError("too few samples to fit the propensity model")

    onehot = (t[:, None] == labels[None, :]).astype(float)
    coef = np.zeros((k - 1, m))
    ridge = 1e-8
    converged = False
    n_iter = 0
    grad = _log_likelihood_grad(coef, xd, onehot)
    for n_iter in range(1, max_iter + 1):
        p = _probabilities(coef, xd)
        # Hessian blocks: -X^T diag(p_l (delta_lm - p_m)) X for l, m < K.
        dim = (k - 1) * m
        hess = np.empty((dim, dim))
        for l in range(k - 1):
            for mm in range(k - 1):
                w = p[:, l] * ((1.0 if l == mm else 0.0) - p[:, mm])
                hess[l * m : (l + 1) * m, mm * m : (mm + 1) * m] = xd.T @ (
                    w[:, None] * xd
                )
        step = np.linalg.solve(hess + ridge * np.eye(dim), grad.ravel())
        coef = coef + step.reshape(k - 1, m)
        grad = _log_likelihood_grad(coef, xd, onehot)
        if np.abs(grad).max() <= tol:
            converged = True
            break

    separation = False
    if np.abs(coef).max() > SEPARATION_COEF_NORM and np.abs(grad).max() > tol:
        separation = True
        warnings.warn(
            "propensity model coefficients diverging; perfect separation suspected",
            SeparationWarning,
        )
    return PropensityModel(
        coefficients=coef,
        labels=labels,
        baseline=labels[-1],
        converged=converged,
        n_iterations=n_iter,
        separation=separation,
    )


def predict_propensities(model: PropensityModel, x) -> np.ndarray:
    """n x K matrix of generalized propensity scores, rows summing to 1."""
    xd = _design(x)
    if xd.shape[1] != model.coefficients.shape[1]:
        raise InvalidInputError("covariate dimension differs from training data")
    return _probabilities(model.coefficients, xd)


def vector_match(scores, t) -> MatchFilter:
    """Trim samples outside the cross-group propensity overlap box.

    l(t) is the largest group-wise minimum of the scores for treatment t,
    h(t) the smallest group-wise maximum; a sample is retained iff its score
    vector lies in [l, h] coordinatewise (closed interval, so the samples
    that achieve the cutoffs are kept).
    """
    scores = np.asarray(scores, dtype=float)
    t = np.asarray(t)
    labels = np.unique(t)
    n, k = scores.shape
    if labels.size != k:
        raise InvalidInputError("score columns must match the number of groups")
    group_masks = [t == lab for lab in labels]
    low = np.array([max(scores[m, j].min() for m in group_masks) for j in range(k)])
    high = np.array([min(scores[m, j].max() for m in group_masks) for j in range(k)])
    inside = np.all((scores >= low) & (scores <= high), axis=1)
    retained = np.flatnonzero(inside)
    if retained.size == 0:
        raise EmptyOverlapError("vector matching retained no samples")
    return MatchFilter(low=low, high=high, retained=retained)
