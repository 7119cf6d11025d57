"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
:class:`HypothesisViolation` (bad input, violated precondition) and
:class:`NumericFailure` (quadrature or root finding did not settle).
"""

from __future__ import annotations


class NevanlabError(Exception):
    """Base class for every error raised by this package."""


class HypothesisViolation(NevanlabError):
    pass


class NumericFailure(NevanlabError):
    pass


# jets
class MismatchedBasePoint(HypothesisViolation):
    pass


class DivisionByZeroSeries(HypothesisViolation):
    pass


# curves
class OutsideDomain(HypothesisViolation):
    pass


class AllCoordinatesVanish(HypothesisViolation):
    pass


class NotReduced(HypothesisViolation):
    pass


class ParseError(HypothesisViolation):
    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


# divisors
class NotHyperplanes(HypothesisViolation):
    pass


class DimensionMismatch(HypothesisViolation):
    pass


class IdenticallyZero(HypothesisViolation):
    pass


# jet differentials
class WeightedDegreeViolation(HypothesisViolation):
    pass


class PoleAtEvaluationPoint(HypothesisViolation):
    pass


class NotOnDivisor(HypothesisViolation):
    pass


# radial functionals
class NoConvergence(NumericFailure):
    pass


class BoundaryZero(NumericFailure):
    pass


class GridExceedsScan(HypothesisViolation):
    pass


class ParameterViolation(HypothesisViolation):
    pass


# second main theorem / defects
class RadiusOutsideProfile(HypothesisViolation):
    pass


class DegenerateInput(HypothesisViolation):
    pass


class BoundedCharacteristic(HypothesisViolation):
    pass


class MultiplicityHypothesisFailed(HypothesisViolation):
    pass


# degree arithmetic
class BelowThreshold(HypothesisViolation):
    pass


class BoundViolation(NevanlabError):
    """An internal inequality that must hold above threshold failed."""


class PreconditionViolation(HypothesisViolation):
    pass
