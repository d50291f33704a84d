"""Exception types raised by oscbound."""


class OscBoundError(Exception):
    """Base class for all library errors."""


class NoConvergence(OscBoundError):
    pass


class SingularHessian(OscBoundError):
    pass


class DimensionUnsupported(OscBoundError):
    pass


class BudgetExceeded(OscBoundError):
    """Evaluation budget ran out before two refinement levels agreed.

    The partial result is attached as ``result`` (``converged`` is False).
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class StencilOutOfDomain(OscBoundError):
    pass


class RadiusExceedsDomain(OscBoundError):
    pass


class TooFewPoints(OscBoundError):
    pass


class ZeroBound(OscBoundError):
    pass


class ConfigError(OscBoundError):
    pass


class OutOfRegime(OscBoundError):
    """Samples violate mu >= lam**(beta - 1)."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)
