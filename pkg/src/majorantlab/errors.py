"""Exception types shared across the package."""


class MajorantLabError(Exception):
    """Base class for all majorantlab errors."""


class DomainError(MajorantLabError, ValueError):
    """Argument outside the domain on which a function is defined."""


class AdmissibilityError(MajorantLabError, ValueError):
    """Exponent pair (c1, c2) violates the admissibility inequality."""


class CapacityError(MajorantLabError):
    """Requested computation exceeds a configured memory/work cap."""


class ConvergenceError(MajorantLabError):
    """Iterative refinement failed to reach the requested tolerance.

    Carries the last two iterates so callers can inspect how far apart
    they were.
    """

    def __init__(self, message, last=None, previous=None):
        super().__init__(message)
        self.last = last
        self.previous = previous
