"""Exception types shared across the solver."""

from __future__ import annotations

from typing import Any


class ConfigurationError(ValueError):
    """Invalid solver parameters or run configuration."""


class ObjectiveDomainError(ArithmeticError):
    """The objective returned a non-finite value or gradient."""

    def __init__(self, message: str, x: Any = None):
        super().__init__(message)
        self.x = x


class OptimalityReached(Exception):
    """Raised when a direction is requested at a stationary point."""


class BacktrackExhausted(RuntimeError):
    """No trial index up to the cap satisfied the step rule.

    Attributes:
        best_lambda: step of the trial with the lowest objective value.
        best_value: that objective value (may be non-finite).
        trials: number of trial evaluations spent.
    """

    def __init__(self, message: str, best_lambda: float, best_value: float, trials: int):
        super().__init__(message)
        self.best_lambda = best_lambda
        self.best_value = best_value
        self.trials = trials
