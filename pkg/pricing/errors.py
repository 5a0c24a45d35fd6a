"""
Exception hierarchy for the pricing core.

Every numerical failure raised by the pricing package derives from
PricingError so the CLI and the service can map it to a single exit code
or HTTP status.
"""


def _plain(value):
    """Array-valued details as lists so error bodies stay JSON-serializable."""
    return value.tolist() if hasattr(value, 'tolist') else value


class PricingError(Exception):
    """Base class for numerical and domain failures in the pricing core."""

    def __init__(self, message, details=None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self):
        """Convert error to dictionary format."""
        body = {
            'error': type(self).__name__,
            'message': self.message
        }
        if self.details:
            body['details'] = self.details
        return body


class DomainError(PricingError):
    """Out-of-range times, ordering violations and malformed grids."""


class HorizonError(DomainError):
    """Evaluation time too close to (or beyond) the information horizon U."""


class RangeError(PricingError):
    """An exponent exceeded the overflow cap."""


class QuadratureError(PricingError):
    """Quadrature did not converge; carries what was achieved."""

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message, {'estimate': _plain(estimate), 'error_bound': _plain(error_bound)})
        self.estimate = estimate
        self.error_bound = error_bound


class PosteriorError(PricingError):
    """The posterior normalizer is zero or not finite."""


class StepSizeError(PricingError):
    """Finite-difference Richardson ratio outside the accepted band."""


class BracketError(PricingError):
    """Generic option bracket is too narrow or the integrand is pathological."""


class ImmediateExerciseError(DomainError):
    """Option coefficients requested at s = t, where only the intrinsic value exists."""


class SimulationError(PricingError):
    """Path simulation could not be carried out."""
