"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
``ValidationError`` (bad input, exit 2) and ``NumericalError`` (rank,
integrality or metric failures while computing, exit 3).
"""


class FracwalkError(Exception):
    """Base class for all package errors."""


class ValidationError(FracwalkError):
    pass


class NumericalError(FracwalkError):
    pass


# graph structure
class InvalidGraph(ValidationError):
    pass


class DisconnectedGraph(ValidationError):
    pass


class VertexOutOfRange(ValidationError):
    pass


class TooManyHiddenVertices(ValidationError):
    pass


class InvalidAnchor(ValidationError):
    pass


# walk model / simulation
class DimensionMismatch(ValidationError):
    pass


class ZeroRowSum(ValidationError):
    pass


class InvalidStart(ValidationError):
    pass


class EmptyObservableSet(ValidationError):
    pass


class InsufficientData(ValidationError):
    pass


# gauge
class ConditionsViolated(ValidationError):
    pass


class SingularGauge(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


# reconstruction
class NonpositiveEntry(ValidationError):
    pass


class DegenerateTriple(ValidationError):
    pass


class DegeneratePair(ValidationError):
    pass


class NotClassifiable(NumericalError):
    pass


class NonIntegerDistance(NumericalError):
    pass


class MetricViolation(NumericalError):
    pass


class RankDefect(NumericalError):
    pass


# io
class ParseError(ValidationError):
    pass


class NonpositiveConductivity(ValidationError):
    pass
