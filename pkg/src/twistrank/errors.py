"""Exception hierarchy shared by all twistrank modules.

Each error family maps to a distinct CLI exit code (see cli.EXIT_CODES).
"""


class TwistrankError(Exception):
    """Base class for all package errors."""


class CapacityError(TwistrankError):
    """A sieve or table would exceed the configured memory budget."""


class WorkBudgetError(TwistrankError):
    """A computation would exceed the configured work budget."""


class UndefinedInputError(TwistrankError):
    """Mathematically undefined input, e.g. the Kronecker symbol (0/0)."""


class PoleError(TwistrankError):
    """A closed-form transform was evaluated at one of its poles."""


class UnsupportedWeightError(TwistrankError):
    """Operation requires a weight kind the given WeightSpec does not have."""


class SingularCurveError(TwistrankError):
    """Discriminant vanishes: not an elliptic curve."""


class BadPrimeError(TwistrankError):
    """A good-reduction operation was invoked at a bad prime (or vice versa)."""


class FixtureError(TwistrankError):
    """Curve fixture file missing, malformed, or missing a required override."""


class TableBoundError(TwistrankError):
    """Requested prime exceeds the bound of a PrimeTable or ApTable."""


class MaskBoundError(TwistrankError):
    """Requested integer exceeds the bound of a SquarefreeMask."""


class CoprimalityError(TwistrankError):
    """A (d, N) = 1 precondition was violated."""


class NonSquarefreeError(TwistrankError):
    """A squarefree precondition (on d or on N) was violated."""


class WrongSignError(TwistrankError):
    """Central-value series called with the wrong functional-equation sign."""


class InsufficientTableError(TwistrankError):
    """Series cutoff exceeds the primes available in the ApTable."""


class AmbiguousSignError(TwistrankError):
    """Root-number inference could not distinguish the two sign hypotheses."""


class ZeroDataError(TwistrankError):
    """Zeros file failed to parse or validate."""


class CoverageError(TwistrankError):
    """Zero data does not cover every admissible twist."""


class ConductorValidationError(TwistrankError):
    """Fixture conductor inconsistent with reduction classification."""


class ConfigError(TwistrankError):
    """CLI/run configuration invalid."""
