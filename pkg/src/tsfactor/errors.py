"""Exception hierarchy.

Two families matter to callers: :class:`InputError` (bad shapes, bad files,
bad configuration) and :class:`NumericalError` (the data are well formed but
the estimator cannot be computed, e.g. collinear regressors).
"""

from __future__ import annotations


class FactorModelError(Exception):
    """Base class for all errors raised by tsfactor."""


class InputError(FactorModelError, ValueError):
    """Malformed input: shapes, ranges, files or configuration."""


class NumericalError(FactorModelError, ArithmeticError):
    """Well-formed input on which an estimator is not computable."""


# numerical
class SingularGram(NumericalError):
    pass


class SingularCrossMoment(NumericalError):
    pass


class BasisOverflow(NumericalError):
    pass


# input / contract violations
class NonSquare(InputError):
    pass


class NonFinite(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class NotHalfOrthogonal(InputError):
    pass


class UnsupportedBasis(InputError):
    pass


class LagTooLarge(InputError):
    pass


class EmptySpectrum(InputError):
    pass


class RankTooLarge(InputError):
    pass


class Empty(InputError):
    pass


class ParseError(InputError):
    """Unparseable cell; ``row`` and ``col`` are 1-based file positions."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        super().__init__(message)
        self.row = row
        self.col = col


class RaggedRows(ParseError):
    pass


class NonFiniteCell(ParseError, NonFinite):
    pass


class ConfigError(InputError):
    def __init__(self, key: str, message: str = ""):
        self.key = key
        super().__init__(f"{key}: {message}" if message else key)


class UnknownKey(ConfigError):
    pass


class MissingRequired(ConfigError):
    pass


class BadValue(ConfigError):
    pass


class NotSymmetric(InputError):
    pass


class ReplicateFailed(NumericalError):
    """A Monte Carlo replicate failed in strict mode."""
