"""Package-wide error types.

The CLI maps ``ConfigError`` to exit code 2 and property/criterion failures
to exit code 1; everything else is a bug.
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (bad keys, degenerate parameters)."""


class ContractViolation(RuntimeError):
    """An operation was called on an oracle/instance that cannot support it."""


class BudgetExceeded(RuntimeError):
    """A run would exceed (or exceeded) the hard query budget cap."""

    def __init__(self, message: str, required: float | None = None):
        super().__init__(message)
        self.required = required
