"""Exception and warning types shared across the package."""


class FlockdynError(Exception):
    """Base class for all package-specific errors."""


class DomainError(FlockdynError, ValueError):
    """Argument lies outside a function's mathematical domain."""


class UnsupportedOrderError(FlockdynError, ValueError):
    """Bessel order outside the finite set this package evaluates."""


class DegenerateDenominatorError(FlockdynError, ArithmeticError):
    """The aggregate parameter's denominator C*ell^n - ell^2 is (numerically) zero."""


class CaseMismatchError(FlockdynError, ValueError):
    """Requested sign branch contradicts the sign of the aggregate parameter."""


class RegimeError(FlockdynError):
    """Parameters outside the biologically relevant regime without the opt-in flag."""


class NoRootError(FlockdynError):
    """No flock support radius exists (aggregate parameter is non-positive)."""


class BracketFailureError(FlockdynError):
    """A root bracket did not show the sign structure the theory guarantees."""


class PositivityFailureError(FlockdynError):
    """A first-root density dipped below tolerance; signals an inconsistency."""


class OutOfSupportError(FlockdynError, ValueError):
    """Closed-form convolution requested outside the profile's support."""


class QuadratureNonConvergenceError(FlockdynError):
    """Adaptive quadrature hit the maximum refinement depth."""


class VerificationFailureError(FlockdynError):
    """Flock verification exceeded its deviation thresholds.

    The offending report is attached as the ``report`` attribute.
    """

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


class NumericalBlowupError(FlockdynError):
    """A simulated coordinate exceeded the configured bound.

    The step index at which the blowup was detected is attached as ``step``.
    """

    def __init__(self, message, step):
        super().__init__(message)
        self.step = step


class LimitMismatchWarning(UserWarning):
    """Asymptotic formula requested far from its validity limit."""


class MultipleRootsWarning(UserWarning):
    """More than one sign change detected in the first 2-D root bracket."""
