"""Exception hierarchy shared by every bflow module."""


class BFlowError(Exception):
    """Base class for all errors raised by bflow."""


class InvalidFieldError(BFlowError, ValueError):
    """A grid field has the wrong shape, an odd/too small size, or non-finite samples."""


class MonotonicityLostError(BFlowError):
    """A diffeomorphism's slope dropped to or below the allowed minimum.

    Raised by the solvers when a trajectory leaves the diffeomorphism group,
    i.e. when the wave breaks. ``partial`` holds the trajectory computed so far
    when raised from an integrator.
    """

    def __init__(self, message, min_slope=None, t=None, partial=None):
        super().__init__(message)
        self.min_slope = min_slope
        self.t = t
        self.partial = partial


class BlowUpError(BFlowError):
    """sup|u| exceeded the configured amplitude bound."""

    def __init__(self, message, t=None, partial=None):
        super().__init__(message)
        self.t = t
        self.partial = partial


class NoConvergenceError(BFlowError):
    """An iteration hit its cap before reaching tolerance."""

    def __init__(self, message, residual=None, history=None):
        super().__init__(message)
        self.residual = residual
        self.history = history


class LinearSolveError(BFlowError):
    """The banded periodic solve in the conjugated-operator path failed."""


class DegenerateSpectrumError(BFlowError, ValueError):
    """Too few resolved Fourier modes to fit a decay slope."""


class InvalidConfigError(BFlowError, ValueError):
    """A solver configuration failed to parse or validate."""


class QuadratureError(BFlowError):
    """Panel refinement failed to reduce a quadrature estimate."""


class SchemaMismatchError(BFlowError, ValueError):
    """A CSV file does not have the columns required by a plot kind."""
