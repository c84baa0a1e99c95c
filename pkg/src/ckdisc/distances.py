"""Distance matrices, centering transforms, Gaussian kernels, and Haar
random orthogonal matrices shared by the statistical tests and simulators.

All functions are pure; matrices are plain float ndarrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DegenerateCovariateError, InvalidInputError
from . import rng as _rng

BANDWIDTH_FLOOR = 1e-8


@dataclass(frozen=True)
class KernelWeights:
    """Symmetric Gaussian kernel weights over covariate distances.

    w has unit diagonal and entries in (0, 1]; rows are normalized on use,
    not on construction.
    """

    w: np.ndarray
    bandwidth: float

    @property
    def n(self) -> int:
        return self.w.shape[0]


def _as_points(points) -> np.ndarray:
    x = np.asarray(points, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1:
        raise InvalidInputError("points must be a nonempty 2-D array")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("points contain non-finite entries")
    return x


def pairwise_euclidean(points) -> np.ndarray:
    """n x n matrix of Euclidean distances between rows of `points`."""
    x = _as_points(points)
    if x.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(x, metric="euclidean"))


def double_center(d) -> np.ndarray:
    """Subtract row and column means and add back the grand mean.

    Output rows and columns all sum to zero; idempotent.
    """
    d = np.asarray(d, dtype=float)
    row = d.mean(axis=1, keepdims=True)
    col = d.mean(axis=0, keepdims=True)
    return d - row - col + d.mean()


def gaussian_kernel(covariate_distances, bandwidth="auto") -> KernelWeights:
    """Gaussian weights exp(-d^2 / (2 h^2)) over a distance matrix.

    With bandwidth="auto", h is the median of the strictly positive
    off-diagonal distances, floored at 1e-8.
    """
    d = np.asarray(covariate_distances, dtype=float)
    if bandwidth == "auto" or bandwidth is None:
        off = d[~np.eye(d.shape[0], dtype=bool)]
        positive = off[off > 0]
        if positive.size == 0:
            raise DegenerateCovariateError(
                "all pairwise covariate distances are zero; cannot pick a bandwidth"
            )
        h = max(float(np.median(positive)), BANDWIDTH_FLOOR)
    else:
        h = float(bandwidth)
        if h <= 0:
            raise InvalidInputError("bandwidth must be positive")
    w = np.exp(-(d * d) / (2.0 * h * h))
    return KernelWeights(w=w, bandwidth=h)


def haar_orthogonal(dim: int, rng) -> np.ndarray:
    """Haar-distributed random orthogonal matrix via QR of a Gaussian matrix.

    The R-diagonal sign correction makes the QR factorization unique, which
    is what yields the exact Haar distribution.
    """
    if dim < 1:
        raise InvalidInputError("dim must be >= 1")
    g = _rng.generator(rng)
    z = g.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    signs = np.where(np.diagonal(r) >= 0, 1.0, -1.0)
    return q * signs
