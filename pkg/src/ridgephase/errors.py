"""Exception hierarchy shared by all ridgephase modules."""


class RidgePhaseError(Exception):
    """Base class for every error raised by this package."""


class PhysicsDomainError(RidgePhaseError, ValueError):
    """Inputs are well formed but describe a physically invalid setup."""


class DegenerateTriple(PhysicsDomainError):
    """Bargmann phase or spherical triangle is undefined for the given states."""


class CollinearPinholes(PhysicsDomainError):
    """The three pinholes do not span a triangle."""


class GeometryOverlap(PhysicsDomainError):
    """An observation point coincides with a source."""


class BadPinholePair(PhysicsDomainError):
    """A pinhole pair index is invalid (e.g. i == j)."""


class EmptyImage(PhysicsDomainError):
    """Image has no positive samples and cannot be scaled."""


class GridTooSmall(PhysicsDomainError):
    """Grid is too small for finite differencing."""


class WindowTooSmall(PhysicsDomainError):
    """Demodulation window covers fewer than two fringe periods."""


class ZeroAmplitude(PhysicsDomainError):
    """No fringe is present at the requested spatial frequency."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class DegenerateLattice(PhysicsDomainError):
    """Ridge lines are (nearly) concurrent so one triangle class collapses.

    ``triangles`` carries whatever non-degenerate elemental triangles were
    still found, so callers can record them instead of discarding the run.
    """

    def __init__(self, message, triangles=(), delta3=None):
        super().__init__(message)
        self.triangles = list(triangles)
        self.delta3 = delta3


class FormatError(RidgePhaseError, ValueError):
    """A file does not match the expected on-disk format."""


class ConfigError(RidgePhaseError, ValueError):
    """A run configuration could not be parsed or validated."""

    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        if where:
            message = f"{', '.join(where)}: {message}"
        super().__init__(message)
        self.line = line
        self.key = key
