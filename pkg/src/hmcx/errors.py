"""Exception hierarchy.

Two families matter to callers: ``ValidationError`` (bad input, the caller
must change something) and ``NumericalError`` (the inputs were well formed
but a number could not be produced). The CLI maps them to exit codes 2 and 3.
"""

from __future__ import annotations


class HMCXError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(HMCXError, ValueError):
    pass


class NumericalError(HMCXError, ArithmeticError):
    pass


class ExprSyntaxError(ValidationError):
    """Malformed expression text. ``position`` is a 0-based character offset."""

    def __init__(self, message: str, source: str, position: int):
        self.source = source
        self.position = position
        super().__init__(f"{message} at position {position} in {source!r}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ArityError(ExprSyntaxError):
    pass


class KernelError(ValidationError):
    pass


class EvaluationDomainError(NumericalError):
    """An expression was evaluated outside its domain.

    ``point`` is the input value of the free variable that triggered the
    failure, not the argument of the offending sub-expression.
    """

    def __init__(self, message: str, point: float, label: str | None = None):
        self.point = point
        self.label = label
        where = f"{label} at {point!r}" if label else repr(point)
        super().__init__(f"{message} (evaluating {where})")


class DivergenceError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class NonNegativityError(ValidationError):
    """The candidate takes a negative value, so it lies outside the class
    hypothesis altogether. This is not a convexity violation."""

    def __init__(self, point: float, value: float):
        self.point = point
        self.value = value
        super().__init__(f"f({point!r}) = {value!r} < 0; the function must be non-negative")


class DominationError(ValidationError):
    def __init__(self, t: float, h2: float, h1: float):
        self.t = t
        self.h2 = h2
        self.h1 = h1
        super().__init__(f"domination hypothesis fails at t={t!r}: h2(t)={h2!r} > h1(t)={h1!r}")


class AuditPreconditionError(ValidationError):
    pass
