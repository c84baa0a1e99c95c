"""K-sample causal conditional discrepancy testing.

Composes propensity-score vector matching with conditional distance
correlation to test whether potential-outcome distributions differ across
nominal treatment groups, plus the simulation and experiment machinery to
study validity and power of the approach.
"""

from .cdcorr import CdcorrConfig, cdcorr_statistic, cdcorr_test, local_permutation
from .cmanova import CmanovaResult, cmanova_test, fit_mlm
from .dcorr import TestResult, dcorr_statistic, dcorr_test
from .distances import (
    KernelWeights,
    double_center,
    gaussian_kernel,
    haar_orthogonal,
    pairwise_euclidean,
)
from .harness import ExperimentConfig, PowerCurve, run_experiment, wald_ci
from .matching import (
    MatchFilter,
    PropensityModel,
    fit_multinomial,
    predict_propensities,
    vector_match,
)
from .pipeline import Dataset, METHODS, causal_cdcorr_test, one_hot, run_test
from .sims import SimulationConfig, SimulatedSample, beta_vector, sigmoid, simulate

__all__ = [
    "CdcorrConfig",
    "CmanovaResult",
    "Dataset",
    "ExperimentConfig",
    "KernelWeights",
    "MatchFilter",
    "METHODS",
    "PowerCurve",
    "PropensityModel",
    "SimulatedSample",
    "SimulationConfig",
    "TestResult",
    "beta_vector",
    "causal_cdcorr_test",
    "cdcorr_statistic",
    "cdcorr_test",
    "cmanova_test",
    "dcorr_statistic",
    "dcorr_test",
    "double_center",
    "fit_mlm",
    "fit_multinomial",
    "gaussian_kernel",
    "haar_orthogonal",
    "local_permutation",
    "one_hot",
    "pairwise_euclidean",
    "predict_propensities",
    "run_experiment",
    "run_test",
    "sigmoid",
    "simulate",
    "vector_match",
    "wald_ci",
]

__version__ = "0.1.0"
