# utils/errors.py
"""
Exception types shared by every lab module.

The CLI maps them onto exit codes:
  ValidationError            -> 2   (a precondition was violated)
  QuadratureError, FitError  -> 1   (a numeric step failed at runtime)
"""

from typing import Optional


class LabError(Exception):
    """Base class for all errors raised by the lab."""


class ValidationError(LabError, ValueError):
    """An argument violates the documented precondition of an operation."""


class QuadratureError(LabError, RuntimeError):
    """Adaptive quadrature stopped above the requested tolerance."""

    def __init__(self, message: str, achieved_error: float, tolerance: float):
        super().__init__(f"{message} (achieved error {achieved_error:.3e}, tolerance {tolerance:.3e})")
        self.achieved_error = achieved_error
        self.tolerance = tolerance


class FitError(LabError):
    """An exponent fit had too few resolved ladder points."""

    def __init__(self, message: str, resolved_points: Optional[int] = None):
        super().__init__(message)
        self.resolved_points = resolved_points


def require(condition: bool, message: str) -> None:
    """Raise ValidationError with `message` unless `condition` holds."""
    if not condition:
        raise ValidationError(message)
