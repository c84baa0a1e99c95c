"""Synthetic data generators for the validity and power studies.

Four settings share a common scaffold: Beta-mixture covariates whose
group-conditional laws are mirror images when a sample is "imbalanced",
per-dimension signal decaying as 2/p^q, Gaussian noise with variance 1/4,
and an optional Haar rotation of the outcome space.

Group labels are 1-based; group 1 is the rotated (or inflated-noise) group.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distances import haar_orthogonal
from .errors import ConfigError
from .pipeline import Dataset
from . import rng as _rng

SETTINGS = ("sigmoidal", "nonmonotone", "kgroup", "heteroskedastic")

#: Tabulation grid for the (unrotated) group mean curves.
MEAN_GRID = np.linspace(-1.0, 1.0, 201)


@dataclass(frozen=True)
class SimulationConfig:
    setting: str
    n: int = 100
    D: int = 10
    K: int = 2
    balance: float = 1.0
    effect: float = 0.0
    q: float = None
    treatment_prob: float = 0.5
    rotate: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ConfigError(f"unknown setting {self.setting!r}")
        if self.setting == "kgroup":
            if self.K < 3:
                raise ConfigError("kgroup requires K >= 3")
        elif self.K != 2:
            raise ConfigError(f"setting {self.setting!r} requires K = 2")
        if not 0.0 <= self.balance <= 1.0:
            raise ConfigError("balance must be in [0, 1]")
        if not 0.0 <= self.effect <= 1.0:
            raise ConfigError("effect must be in [0, 1]")
        if self.q is None:
            object.__setattr__(self, "q", 1.1 if self.setting == "kgroup" else 1.5)
        if self.q <= 1.0:
            raise ConfigError("decay exponent q must exceed 1")


@dataclass(frozen=True)
class SimulatedSample:
    dataset: Dataset
    #: Unrotated group mean curves on MEAN_GRID, shape (K, len(grid), D).
    group_means: np.ndarray
    rotation: np.ndarray
    grid: np.ndarray = field(default_factory=lambda: MEAN_GRID.copy())


def sigmoid(x):
    """Overflow-safe logistic function."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    ex = np.exp(arr[~pos])
    out[~pos] = ex / (1.0 + ex)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out[0])
    return out


def beta_vector(D: int, q: float) -> np.ndarray:
    """Per-dimension signal coefficients 2/p^q for p in 1..D."""
    if D < 1:
        raise ConfigError("D must be >= 1")
    if q <= 1.0:
        raise ConfigError("q must exceed 1")
    p = np.arange(1, D + 1, dtype=float)
    return 2.0 / p**q


def sample_covariates(K: int, balance: float, treatment_prob: float, n: int, rng):
    """Group labels and scalar covariates with tunable cross-group balance.

    A balanced sample draws its covariate from 2*Beta(10,10)-1 regardless of
    group; an imbalanced sample draws from the left-skewed 2*Beta(2,8)-1 in
    group 1 and the mirrored 2*Beta(8,2)-1 otherwise.
    """
    g = _rng.generator(rng)
    if K == 2:
        groups = g.random(n) < treatment_prob
        groups = np.where(groups, 2, 1)
    else:
        probs = np.full(K, (1.0 - treatment_prob) / (K - 1))
        probs[0] = treatment_prob
        groups = g.choice(np.arange(1, K + 1), size=n, p=probs)
    balanced = g.random(n) < balance
    z = np.empty(n)
    for i in range(n):
        if balanced[i]:
            z[i] = g.beta(10, 10)
        elif groups[i] == 1:
            z[i] = g.beta(2, 8)
        else:
            z[i] = g.beta(8, 2)
    x = 2.0 * z - 1.0
    return groups, x[:, None]


def _mean_curves(cfg: SimulationConfig, grid) -> np.ndarray:
    """Group-conditional mean outcome per covariate level, shape (K, G, D)."""
    beta = beta_vector(cfg.D, cfg.q)
    base = 5.0 * sigmoid(8.0 * grid)  # (G,)
    r = np.cos(cfg.effect * np.pi)
    curves = np.zeros((cfg.K, grid.size, cfg.D))
    if cfg.setting in ("sigmoidal", "kgroup"):
        rotated = r * (base - 2.5) + 2.5
        curves[0] = rotated[:, None] * beta[None, :]
        for k in range(1, cfg.K):
            curves[k] = base[:, None] * beta[None, :]
    elif cfg.setting == "nonmonotone":
        bump = (np.abs(grid) <= 0.3).astype(float)
        curves[0] = -cfg.effect * bump[:, None] * beta[None, :]
        curves[1] = cfg.effect * bump[:, None] * beta[None, :]
    else:  # heteroskedastic: identical means, group difference is in the noise
        curves[:] = base[:, None] * beta[None, :]
    return curves


def simulate(cfg: SimulationConfig, rng=None) -> SimulatedSample:
    """Draw one dataset from the configured setting.

    Noise is N(0, 1/4) per dimension; in the heteroskedastic setting the
    group-1 noise standard deviation is inflated by (1 + effect), so at full
    effect it is double that of the other group.  The recorded mean curves
    are unrotated.
    """
    ss = _rng.as_seed_sequence(cfg.seed if rng is None else rng)
    g = np.random.default_rng(ss)
    groups, x = sample_covariates(cfg.K, cfg.balance, cfg.treatment_prob, cfg.n, g)

    beta = beta_vector(cfg.D, cfg.q)
    base = 5.0 * sigmoid(8.0 * x[:, 0])
    r = np.cos(cfg.effect * np.pi)
    means = np.empty((cfg.n, cfg.D))
    if cfg.setting in ("sigmoidal", "kgroup"):
        profile = np.where(groups == 1, r * (base - 2.5) + 2.5, base)
        means[:] = profile[:, None] * beta[None, :]
    elif cfg.setting == "nonmonotone":
        bump = (np.abs(x[:, 0]) <= 0.3).astype(float)
        sign = np.where(groups == 1, -1.0, 1.0)
        means[:] = (cfg.effect * sign * bump)[:, None] * beta[None, :]
    else:
        means[:] = base[:, None] * beta[None, :]

    noise = 0.5 * g.standard_normal((cfg.n, cfg.D))
    if cfg.setting == "heteroskedastic":
        noise[groups == 1] *= 1.0 + cfg.effect
    y = means + noise

    if cfg.rotate:
        rotation = haar_orthogonal(cfg.D, g)
        y = y @ rotation.T
    else:
        rotation = np.eye(cfg.D)

    dataset = Dataset(outcomes=y, groups=groups, covariates=x)
    return SimulatedSample(
        dataset=dataset,
        group_means=_mean_curves(cfg, MEAN_GRID),
        rotation=rotation,
    )
