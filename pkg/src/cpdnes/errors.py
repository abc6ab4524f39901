"""Exception types shared across the library."""

from __future__ import annotations


class CpdnesError(Exception):
    """Base class for domain errors raised by this package."""


class ConfigError(CpdnesError):
    """A config document is malformed; the message names the offending field."""


class CompressionRangeError(CpdnesError):
    """Quantizer input left the representable range."""

    def __init__(self, coordinate: int, value: float, limit: float):
        self.coordinate = coordinate
        self.value = value
        self.limit = limit
        super().__init__(
            f"coordinate {coordinate} has |{value:.6g}| >= representable limit {limit:.6g}"
        )

    def __reduce__(self):
        return (CompressionRangeError, (self.coordinate, self.value, self.limit))


class NumericFault(CpdnesError):
    """A run produced a non-finite or non-representable state.

    Carries the iteration at which the fault occurred so divergence is
    reported, never silently clipped.
    """

    def __init__(self, iteration: int, message: str):
        self.iteration = iteration
        self.message = message
        super().__init__(f"iteration {iteration}: {message}")

    def __reduce__(self):
        return (NumericFault, (self.iteration, self.message))


class ConvergenceError(CpdnesError):
    """An iterative solve exhausted its budget; carries the last residual."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"no convergence after {iterations} iterations (residual {residual:.3e})"
        )

    def __reduce__(self):
        return (ConvergenceError, (self.residual, self.iterations))
