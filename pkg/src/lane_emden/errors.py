"""Exception hierarchy shared by all modules."""


class LaneEmdenError(Exception):
    """Base class for errors raised by this package."""


class DomainError(LaneEmdenError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class DegenerateConstantsError(DomainError):
    """Moment constants make a quotient ill-defined (e.g. L3 = 0)."""


class SolverError(LaneEmdenError, RuntimeError):
    """The radial ground-state solver failed.

    ``trace`` carries the diagnostic history (bracket probes, last good
    radius, ...) so callers can report why it failed.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class QuadratureError(LaneEmdenError, RuntimeError):
    """A quadrature did not reach its requested tolerance."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
