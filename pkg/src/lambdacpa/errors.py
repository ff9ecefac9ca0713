"""Exception types raised by the solver and analysis routines."""


class CpaError(Exception):
    """Base class for package errors."""


class VariantMismatch(CpaError, ValueError):
    """Model variant is inconsistent with the supplied parameters."""


class AsymmetricCavity(CpaError, ValueError):
    """Operation requires kappa_l == kappa_r."""


class FormulaDomain(CpaError, ValueError):
    """No closed-form CPA expression applies at these parameters."""


class RootFindingFailure(CpaError, RuntimeError):
    def __init__(self, message, coefficients=None, params=None):
        super().__init__(message)
        self.coefficients = coefficients
        self.params = params

    def __str__(self):
        msg = super().__str__()
        if self.coefficients is not None:
            msg += f"\n  polynomial (ascending): {list(self.coefficients)}"
        if self.params is not None:
            msg += f"\n  params: {self.params}"
        return msg


class NoMatchingRoot(CpaError, RuntimeError):
    """No steady state lies close to the predicted CPA intensity."""


class NotFound(CpaError, RuntimeError):
    """Bracketed search found no transition."""


class NotBistable(CpaError, RuntimeError):
    """Requested hysteresis at a point with a single steady state.

    ``trace`` holds the degenerate trace (up == down) for callers that want it.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class GridError(CpaError, ValueError):
    """Malformed sweep grid."""
