"""Exception hierarchy shared across the package."""


class BayesGeomError(Exception):
    """Base class for all package errors."""


class DomainError(BayesGeomError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureNonConvergedError(BayesGeomError, ArithmeticError):
    """Adaptive quadrature hit the subdivision budget before reaching tolerance.

    Carries the best estimate so callers can decide whether to use it anyway.
    """

    def __init__(self, message: str, value: float, error: float):
        super().__init__(message)
        self.value = value
        self.error = error


class NanInIntegrandError(BayesGeomError, ArithmeticError):
    """The integrand produced NaN at a quadrature node."""


class NotSquareIntegrableError(BayesGeomError, ValueError):
    """A scalar field failed its square-integrability probe."""


class ZeroNormError(BayesGeomError, ZeroDivisionError):
    """Compatibility is undefined when one of the fields has zero norm."""


class ImproperMemberError(BayesGeomError, ArithmeticError):
    """A conjugate-family normalizer diverges; the message names the K-term."""


class EstimatorInputError(BayesGeomError, ValueError):
    """A Monte Carlo estimator was given draws that violate its contract."""
