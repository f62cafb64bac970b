"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SwshError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SwshError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class StateError(SwshError, RuntimeError):
    """An operation was called before its prerequisites were built."""


class NumericError(SwshError, ArithmeticError):
    """A floating-point procedure failed to reach its tolerance."""


class SingularFlowError(SwshError, ArithmeticError):
    """A parameter-flow pivot vanished; carries the (order, index) location."""

    def __init__(self, message: str, order: int, index: int):
        super().__init__(message)
        self.order = order
        self.index = index


class VerificationError(SwshError, AssertionError):
    """An exact internal identity failed.

    ``details`` names the module, operation, order and offending
    coefficient indices so reports can localise the failure.
    """

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.details = details or {}
