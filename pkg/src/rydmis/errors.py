"""Exception hierarchy shared across the package."""


class RydmisError(Exception):
    """Base class for all domain errors raised by this package."""


# -- graphs ------------------------------------------------------------------

class DuplicatePosition(RydmisError):
    pass


class SpacingViolation(RydmisError):
    pass


class UnknownKind(RydmisError):
    pass


class ExhaustedAttempts(RydmisError):
    pass


class LengthMismatch(RydmisError):
    pass


class TooLarge(RydmisError):
    pass


class InvalidInterval(RydmisError):
    pass


class ParseError(RydmisError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# -- embedding ---------------------------------------------------------------

class InvalidOrdering(RydmisError):
    pass


class MissingProvenance(RydmisError):
    pass


class NonConvergence(RydmisError):
    pass


# -- emulator ----------------------------------------------------------------

class ZeroDistance(RydmisError):
    pass


class TooManyQubits(RydmisError):
    pass


class IntegratorFailure(RydmisError):
    pass


class NoConvergence(RydmisError):
    pass


class AmbiguousManifold(RydmisError):
    pass


class ZeroGap(RydmisError):
    pass


class InvalidNoise(RydmisError):
    pass


# -- schedules ---------------------------------------------------------------

class NonMonotoneTimes(RydmisError):
    pass


class BoundViolation(RydmisError):
    pass


class DurationTooShort(RydmisError):
    pass


# -- bayesopt ----------------------------------------------------------------

class SingularKernelMatrix(RydmisError):
    pass


class BudgetExhausted(RydmisError):
    pass


# -- costs / pipeline --------------------------------------------------------

class MissingMisSize(RydmisError):
    pass


# -- measurement -------------------------------------------------------------

class OutOfRange(RydmisError):
    pass


class TooLargeForExact(RydmisError):
    pass


class SingularModel(RydmisError):
    pass


class EmptyDistribution(RydmisError):
    pass


# -- postprocess -------------------------------------------------------------

class NotAnIndependentSet(RydmisError):
    pass


# -- analysis ----------------------------------------------------------------

class InsufficientData(RydmisError):
    pass


class AllSaturated(RydmisError):
    pass


class ProbabilityUnderflow(RydmisError):
    pass
