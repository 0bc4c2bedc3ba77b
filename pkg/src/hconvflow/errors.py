"""Exception types raised by the library."""


class HConvFlowError(Exception):
    """Base class for all library errors."""


class DomainError(HConvFlowError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class NonFinite(HConvFlowError, FloatingPointError):
    """A derived geometric field contains NaN or Inf."""


class NotStrictlyHConvex(HConvFlowError, ValueError):
    """Some curvature does not exceed 1 by the required margin."""


class NotHConvex(HConvFlowError, ValueError):
    """Some curvature is below 1 (the curve is not even weakly h-convex)."""


class NotInCone(HConvFlowError, ValueError):
    """A curvature vector lies outside the required Garding cone."""


class OutOfRange(HConvFlowError, ValueError):
    """A target value is not bracketed by the inversion interval."""


class InsufficientDecay(HConvFlowError, ValueError):
    """A flow trace does not contain enough exponential decay to fit a rate."""


class AbortedMargin(HConvFlowError, RuntimeError):
    """The flow reached the h-convexity margin floor and the run was stopped.

    The partially recorded trace, when available, is attached as ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
