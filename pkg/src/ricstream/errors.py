"""Exception hierarchy shared by every module of the package."""


class RicstreamError(Exception):
    """Base class for all errors raised by ricstream."""


class NumericalError(RicstreamError):
    """Loss of a numerical guarantee (positive definiteness, solvability)."""


class NotPositiveDefinite(NumericalError):
    pass


class SingularSystem(NumericalError):
    pass


class DimensionMismatch(RicstreamError, ValueError):
    pass


class InvalidTarget(RicstreamError, ValueError):
    pass


class ScNotTracked(RicstreamError):
    """Raised when an operation needs the scalar term but it is not tracked."""


class NonPositiveGamma(RicstreamError, ValueError):
    pass


class ZeroReference(RicstreamError, ValueError):
    pass


class StreamOutOfRange(RicstreamError):
    pass


class OffLattice(StreamOutOfRange):
    """A gridded source was queried between its lattice points."""


class ConfigError(RicstreamError):
    """Base for configuration problems (CLI exit code 2)."""


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownKey(ParseError):
    pass


class RangeError(ParseError):
    pass


class SnapshotError(RicstreamError):
    pass


class BadMagic(SnapshotError):
    pass


class VersionMismatch(SnapshotError):
    pass


class DigestMismatch(SnapshotError):
    pass


class TruncatedFile(SnapshotError):
    pass
