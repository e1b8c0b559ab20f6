"""Exception hierarchy.

Every error raised by the package derives from :class:`MarginError`, which is
itself a ``ValueError`` so callers that only care about bad input can catch
that instead.
"""


class MarginError(ValueError):
    pass


class DimensionMismatch(MarginError):
    pass


class DegenerateSegment(MarginError):
    pass


class EpsOutOfRange(MarginError):
    pass


class EmptyInput(MarginError):
    pass


class CoincidentSeeds(MarginError):
    pass


class MissingLabels(MarginError):
    pass


class SingleClass(MarginError):
    pass


class NonPositiveInput(MarginError):
    pass


class IndexOutOfRange(MarginError, IndexError):
    pass


class EmptyPool(MarginError):
    pass


class InfeasibleSpec(MarginError):
    pass


class WrongDimension(MarginError):
    pass


class EmptyClass(MarginError):
    pass


class OracleFailure(MarginError, RuntimeError):
    """Raised by an oracle that cannot answer; the engine lets it propagate."""
