"""Exception types raised across the package."""


class SysIndexError(Exception):
    """Base class for all errors raised by sysindex."""


class TrajectoryError(SysIndexError):
    """A trajectory violates one of its invariants.

    ``index`` is the offending sample index when one can be named.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class Empty(TrajectoryError):
    pass


class NonMonotoneTime(TrajectoryError):
    pass


class DimensionMismatch(TrajectoryError):
    pass


class NonFiniteValue(TrajectoryError):
    pass


class FfopError(SysIndexError):
    pass


class NonPositiveDenominator(FfopError):
    pass


class EmptyInterval(FfopError):
    pass


class IndeterminateZeroOverZero(FfopError):
    pass


class AllDeadZone(FfopError):
    pass


class SlopeInDenominator(FfopError):
    pass


class TooLarge(FfopError):
    pass


class EstimatorError(SysIndexError):
    pass


class ZeroDenominator(EstimatorError):
    pass


class HasRealizationBreaks(EstimatorError):
    pass


class NonFiniteInput(EstimatorError):
    pass


class BoundViolation(EstimatorError):
    pass


class NoSamples(EstimatorError):
    pass


class SimulationError(SysIndexError):
    pass


class UnknownName(SimulationError):
    pass


class NonFiniteState(SimulationError):
    pass


class ParseError(SysIndexError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EmptySeries(SysIndexError):
    pass
