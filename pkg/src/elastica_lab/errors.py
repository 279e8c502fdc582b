"""Exception and warning types raised across the package."""


class ElasticaLabError(Exception):
    """Base class for all package errors."""


class DegenerateSegment(ElasticaLabError):
    """Two consecutive curve samples coincide."""


class AmbiguousBranchWarning(UserWarning):
    """A tangent increment sits exactly at +-pi; the +pi branch was taken."""


class CurveFormatError(ElasticaLabError):
    """A curve or measure file does not satisfy its schema or invariants."""


class GridMismatch(ElasticaLabError):
    pass


class LengthMismatch(ElasticaLabError):
    pass


class AdmissibilityError(ElasticaLabError):
    """An open curve violates the endpoint or boundary conditions."""


class LPNumericalFailure(ElasticaLabError):
    """The LP solver could not certify optimality."""


class NoConvergence(ElasticaLabError):
    pass


class ParameterOutOfRange(ElasticaLabError):
    pass


class BlocksDoNotFit(ElasticaLabError):
    """The requested singularities cannot be realized at this epsilon."""


class WindowsOverlap(ElasticaLabError):
    pass


class TurningNumberMismatch(ElasticaLabError):
    pass


class NotFound(ElasticaLabError):
    pass


class LineSearchStall(ElasticaLabError):
    """Backtracking failed to produce an Armijo step.

    The last state is attached as ``state`` so callers can inspect it.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class ConfigError(ElasticaLabError):
    pass
