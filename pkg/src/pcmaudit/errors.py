"""Exception types shared across the package."""

from __future__ import annotations

import numpy as np


class ValidationError(ValueError):
    """Input data violates a structural requirement (positivity, reciprocity, arity)."""


class MatrixParseError(ValidationError):
    """A matrix text file could not be parsed.

    Carries the 1-based ``line`` and ``column`` of the offending token when known.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class ConfigurationError(ValueError):
    """A required configuration value is missing or inconsistent (e.g. no RI for this n)."""


class ConvergenceError(RuntimeError):
    """The eigenvector iteration did not converge within the iteration budget.

    The last iterate is exposed so callers can inspect how far the solve got;
    it must not be used as a converged result.
    """

    def __init__(self, message: str, last_weights: np.ndarray, residual: float, iterations: int):
        self.last_weights = last_weights
        self.residual = residual
        self.iterations = iterations
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
