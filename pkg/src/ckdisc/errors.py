"""Typed errors shared across the package.

Applicability errors mark method/data incompatibilities (e.g. a parametric
test in a regime where it is undefined); the experiment harness records
these per-cell instead of failing a whole run.
"""


class CkdiscError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CkdiscError, ValueError):
    """Malformed or non-finite input."""


class TooFewSamplesError(CkdiscError):
    """Not enough samples for the requested test."""


class DegenerateCovariateError(CkdiscError):
    """All pairwise covariate distances are zero; no bandwidth exists."""


class SingularDesignError(CkdiscError):
    """Rank-deficient design matrix."""


class HdlssError(CkdiscError):
    """Outcome dimension exceeds residual degrees of freedom."""


class EmptyOverlapError(CkdiscError):
    """Vector matching retained no samples."""


class InsufficientOverlapError(CkdiscError):
    """Vector matching retained too few samples to test."""


class ConfigError(CkdiscError):
    """Invalid simulation or experiment configuration."""


class CsvParseError(CkdiscError):
    """Malformed CSV input."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SeparationWarning(UserWarning):
    """Perfect separation suspected in a propensity model fit."""


#: Errors the harness records as "not applicable" rather than propagating.
APPLICABILITY_ERRORS = (HdlssError, EmptyOverlapError, InsufficientOverlapError)
