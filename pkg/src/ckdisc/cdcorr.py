"""Conditional distance correlation and its local-permutation test.

For each anchor sample k, the covariate kernel row supplies weights under
which both distance matrices are double-centered; the weighted centered
product gives a per-anchor conditional distance correlation, and the
statistic is the uniform average over anchors.

The permutation null shuffles group labels only within blocks of covariate
nearest neighbors, preserving the conditional law of v given x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dcorr import TestResult, permutation_p_value
from .distances import KernelWeights, gaussian_kernel, pairwise_euclidean
from .errors import InvalidInputError, TooFewSamplesError
from . import rng as _rng

VARIANCE_TOL = 1e-14


@dataclass(frozen=True)
class CdcorrConfig:
    bandwidth: object = "auto"
    n_replicates: int = 1000
    block_size: int = 5

    def __post_init__(self):
        if self.block_size < 2:
            raise InvalidInputError("block_size must be >= 2")
        if self.n_replicates < 1:
            raise InvalidInputError("n_replicates must be >= 1")


def _anchor_weights(kernel: KernelWeights) -> np.ndarray:
    w = np.asarray(kernel.w, dtype=float)
    return w / w.sum(axis=1, keepdims=True)


def _weighted_parts(d, W):
    """Per-anchor weighted moments of a distance matrix.

    Returns (M, g, var) where M[i, k] is the weighted row mean around anchor
    k, g[k] the weighted grand mean, and var[k] the weighted centered sum of
    squares.  Uses that weighted double-centering is an orthogonal projection
    under the anchor's product weights, so the centered sum of squares
    reduces to moments of the raw matrix.
    """
    M = d @ W.T
    g = np.einsum("ki,ik->k", W, M)
    s2 = ((W @ (d * d)) * W).sum(axis=1)
    var = s2 - 2.0 * np.einsum("ki,ik,ik->k", W, M, M) + g * g
    return M, g, var


def _weighted_cov(dy, My, gy, dv, Mv, gv, W):
    t = ((W @ (dy * dv)) * W).sum(axis=1)
    cross = np.einsum("ki,ik,ik->k", W, My, Mv)
    return t - 2.0 * cross + gy * gv


def _anchor_corr(cov, vary, varv):
    denom = vary * varv
    ok = (vary > VARIANCE_TOL) & (varv > VARIANCE_TOL)
    corr = np.zeros_like(cov)
    np.divide(cov, np.sqrt(denom, where=ok, out=np.ones_like(denom)), where=ok, out=corr)
    return np.clip(corr, 0.0, 1.0)


def cdcorr_statistic(dy, dv, w: KernelWeights) -> float:
    """Anchor-averaged conditional distance correlation."""
    dy = np.asarray(dy, dtype=float)
    dv = np.asarray(dv, dtype=float)
    if dy.shape != dv.shape or dy.shape != w.w.shape:
        raise InvalidInputError("dy, dv, and kernel weights must have equal shape")
    W = _anchor_weights(w)
    My, gy, vary = _weighted_parts(dy, W)
    Mv, gv, varv = _weighted_parts(dv, W)
    cov = _weighted_cov(dy, My, gy, dv, Mv, gv, W)
    return float(_anchor_corr(cov, vary, varv).mean())


def covariate_blocks(x_distances, block_size: int) -> list:
    """Greedy nearest-neighbor partition of [n] into blocks.

    Each block is seeded with the unassigned sample of smallest index and
    filled with its block_size - 1 nearest unassigned neighbors; the last
    block may be smaller.
    """
    if block_size < 2:
        raise InvalidInputError("block_size must be >= 2")
    d = np.asarray(x_distances, dtype=float)
    n = d.shape[0]
    blocks = []
    unassigned = np.ones(n, dtype=bool)
    while unassigned.any():
        seed = int(np.flatnonzero(unassigned)[0])
        unassigned[seed] = False
        candidates = np.flatnonzero(unassigned)
        if candidates.size > block_size - 1:
            order = np.argsort(d[seed, candidates], kind="stable")
            neighbors = candidates[order[: block_size - 1]]
        else:
            neighbors = candidates
        unassigned[neighbors] = False
        blocks.append(np.concatenate(([seed], neighbors)))
    return blocks


def _permute_blocks(blocks, n: int, g: np.random.Generator) -> np.ndarray:
    perm = np.arange(n)
    for block in blocks:
        perm[block] = g.permutation(block)
    return perm


def local_permutation(x_distances, block_size: int, rng=None) -> np.ndarray:
    """Permutation of [n] uniform within covariate nearest-neighbor blocks,
    identity across blocks."""
    d = np.asarray(x_distances, dtype=float)
    blocks = covariate_blocks(d, block_size)
    return _permute_blocks(blocks, d.shape[0], _rng.generator(rng))


def cdcorr_test(y, v, x, cfg: CdcorrConfig = CdcorrConfig(), rng=None) -> TestResult:
    """Local-permutation test of conditional independence of y and v given x."""
    dy = pairwise_euclidean(y)
    dv = pairwise_euclidean(v)
    dx = pairwise_euclidean(x)
    n = dy.shape[0]
    if dv.shape[0] != n or dx.shape[0] != n:
        raise InvalidInputError("y, v, and x must have equal row counts")
    if n < 4:
        raise TooFewSamplesError(f"need at least 4 samples, got {n}")

    kernel = gaussian_kernel(dx, cfg.bandwidth)
    W = _anchor_weights(kernel)
    My, gy, vary = _weighted_parts(dy, W)

    def statistic(dv_cur):
        Mv, gv, varv = _weighted_parts(dv_cur, W)
        cov = _weighted_cov(dy, My, gy, dv_cur, Mv, gv, W)
        return float(_anchor_corr(cov, vary, varv).mean())

    observed = statistic(dv)
    blocks = covariate_blocks(dx, cfg.block_size)
    null = np.empty(cfg.n_replicates)
    for r, g in enumerate(_rng.replicate_rngs(rng, cfg.n_replicates)):
        perm = _permute_blocks(blocks, n, g)
        null[r] = statistic(dv[np.ix_(perm, perm)])
    return TestResult(
        statistic=observed,
        p_value=permutation_p_value(observed, null),
        n_replicates=cfg.n_replicates,
        method="cdcorr",
    )
