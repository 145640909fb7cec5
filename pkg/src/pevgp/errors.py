"""Exception hierarchy shared by all modules."""


class PevgpError(Exception):
    """Base class for every error raised by this package."""


class NumericalError(PevgpError):
    """A numerical routine could not produce a valid result."""


class NotPositiveDefinite(NumericalError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class OptimizationFailure(NumericalError):
    pass


class DegenerateSnapshot(NumericalError):
    """The snapshot matrix has no nonzero singular value."""


class DimensionMismatch(PevgpError, ValueError):
    pass


class ParameterOutOfRange(PevgpError, ValueError):
    pass


class ZeroReference(PevgpError, ValueError):
    pass


class OutOfDomain(PevgpError, ValueError):
    pass


class DuplicateKnots(PevgpError, ValueError):
    pass


class ConfigError(PevgpError, ValueError):
    """Invalid run configuration; message carries the offending line."""


class ArchiveError(PevgpError):
    """Corrupt or inconsistent archive file."""
