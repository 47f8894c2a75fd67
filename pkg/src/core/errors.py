from __future__ import annotations

"""Error hierarchy shared by every deltawv module.

Each error carries the process exit code the CLI maps it to.
"""

from typing import Any


class DeltaWVError(Exception):
    """Base class for deltawv errors."""

    exit_code = 3

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context = context


class ConfigurationError(DeltaWVError):
    """Bad flag, environment value or series name."""

    exit_code = 2


class EquationParseError(DeltaWVError):
    """Equation file is not well-formed JSON or holds malformed rationals."""

    exit_code = 2


class EquationValidationError(DeltaWVError):
    """Equation parses but is degenerate (zero leading coefficient, trivial)."""

    exit_code = 2


class NonConvergenceError(DeltaWVError):
    """A summation never met its tail criterion within the term budget."""


class NeedsMoreTermsError(NonConvergenceError):
    """A Newton series ran out of computed coefficients before converging."""


class PrecisionExhaustedError(DeltaWVError):
    """Requested accuracy is unreachable within the precision budget."""


class DivisionAtZeroError(DeltaWVError):
    """|f(z)| is below its own error bound; z is too close to a zero of f."""


class InsufficientDataError(DeltaWVError):
    """Too few usable samples for a fit."""


class DataError(DeltaWVError):
    """Sampled data violates a structural expectation (e.g. non-monotone log M)."""


class MinimalSolutionNotFoundError(DeltaWVError):
    """Backward recurrence did not isolate a stable minimal solution."""
