"""Special functions and the adaptive quadrature oracle."""

from .quadrature import (
    LogIntegralResult,
    QuadResult,
    QuadSpec,
    SupportRegion,
    integrate,
    log_integrate,
)
from .special import log_beta, log_binom, log_gamma

__all__ = [
    "LogIntegralResult",
    "QuadResult",
    "QuadSpec",
    "SupportRegion",
    "integrate",
    "log_integrate",
    "log_beta",
    "log_binom",
    "log_gamma",
]
