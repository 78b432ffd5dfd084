"""Exception types raised by the toolkit."""


class ReinhardtError(Exception):
    """Base class for all errors raised by this package."""


class NotPositivelyOriented(ReinhardtError, ValueError):
    """An sl2 element with c21 <= 0 has no half-plane coordinate."""


class DegenerateDenominator(ReinhardtError, ArithmeticError):
    """trace(Z0 X) vanished: the point touched the boundary of the star region."""


class StarExit(ReinhardtError):
    """A trajectory left the star region.

    Attributes
    ----------
    link : int or None
        Index of the offending link in a schedule, if known.
    time : float or None
        Time at which the exit was detected.
    """

    def __init__(self, message, link=None, time=None):
        super().__init__(message)
        self.link = link
        self.time = time


class StepSizeUnderflow(ReinhardtError):
    """The adaptive integrator could not make progress."""


class BracketFailure(ReinhardtError):
    """No sign change of a scalar residual was found in the search bracket."""


class ClosureFailure(ReinhardtError):
    """Periodic boundary conditions are not met to tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class SingularSystem(ReinhardtError, ArithmeticError):
    """The costate boundary-value system has the wrong rank."""


class NewtonDivergence(ReinhardtError, ArithmeticError):
    """Newton iteration failed to converge."""


class ChartFailure(ReinhardtError, ValueError):
    """A point lies outside the domain of the reduced-initial-condition chart."""
