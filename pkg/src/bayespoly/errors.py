"""Exception types raised across the package."""

from __future__ import annotations


class BayesPolyError(Exception):
    """Base class for package errors."""


class DomainError(BayesPolyError, ValueError):
    """An argument lies outside the domain of a function."""


class SingularMatrixError(BayesPolyError, ArithmeticError):
    """Cholesky hit a non-positive pivot."""

    def __init__(self, pivot: int, model=None, message: str | None = None):
        self.pivot = pivot
        self.model = model
        if message is None:
            where = f" (model {model.name})" if model is not None else ""
            message = f"matrix is not positive definite: pivot {pivot} <= 0{where}"
        super().__init__(message)


class UnsupportedModelError(BayesPolyError, ValueError):
    pass


class ArityError(BayesPolyError, ValueError):
    pass


class EmptyDataError(BayesPolyError, ValueError):
    pass


class NumericGuardError(BayesPolyError, ArithmeticError):
    pass


class AlignmentError(BayesPolyError, ValueError):
    pass


class ParseError(BayesPolyError, ValueError):
    """Malformed input file or token.

    ``line`` and ``column`` are 1-based; either may be ``None`` when unknown.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 token: str | None = None):
        self.line = line
        self.column = column
        self.token = token
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if column is not None:
            loc.append(f"column {column}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
