"""Exception types raised across the package.

Every error is a ValueError subclass so callers can catch broadly; the
specific classes exist so tests and tooling can assert on the exact
failure mode.
"""


class ProtomineError(ValueError):
    """Base class for all package-specific errors."""


class ZeroNormError(ProtomineError):
    """A vector with norm below the degeneracy floor where a direction is required."""


class DimensionMismatchError(ProtomineError):
    """Operands whose vector lengths disagree."""


class EmptyInputError(ProtomineError):
    """An aggregate over zero vectors."""


class TooFewSamplesError(ProtomineError):
    """A spread estimate over fewer than two samples."""


class TooFewPointsError(ProtomineError):
    """Fewer points than requested clusters."""


class IndexOutOfRangeError(ProtomineError, IndexError):
    """A positional index outside the valid range."""


class InvalidConfigError(ProtomineError):
    """A structurally invalid configuration value."""


class ClassIndexOutOfRangeError(ProtomineError):
    """A base-class index outside 1..C."""


class MalformedSnapshotError(ProtomineError):
    """A serialized memory bank that cannot be decoded."""


class VersionMismatchError(ProtomineError):
    """A serialized memory bank with an unsupported format version."""


class DegeneratePairError(ProtomineError):
    """Two anchor vectors too close together to define a scale."""


class EmptyBatchError(ProtomineError):
    """A batch-level operation invoked with zero rows."""


class KTooLargeError(ProtomineError):
    """A top-k request larger than the candidate pool."""


class EmptySelectionError(ProtomineError):
    """A memory update from an empty selection."""


class LengthMismatchError(ProtomineError):
    """Parallel sequences of unequal length."""


class LabelOutOfRangeError(ProtomineError):
    """A class label outside the valid label set."""


class UndefinedMetricError(ProtomineError):
    """A metric whose denominator is empty; report the value as absent, never zero."""
