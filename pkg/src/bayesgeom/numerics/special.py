"""Log-domain special functions used by every closed-form expression."""

import math

from ..errors import DomainError


def log_gamma(x: float) -> float:
    """Natural log of the Gamma function for x > 0.

    Backed by the platform lgamma, which is accurate to a few ulp over the
    whole range we care about (1e-3 .. 1e6).
    """
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


def log_beta(a: float, b: float) -> float:
    """ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b).

    Symmetric in (a, b) by construction: the two operand orders execute the
    same float operations.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"log_beta requires a, b > 0, got ({a}, {b})")
    if a > b:
        a, b = b, a
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def log_binom(n: int, k: int) -> float:
    """ln of the binomial coefficient C(n, k)."""
    if k < 0 or k > n:
        raise DomainError(f"log_binom requires 0 <= k <= n, got ({n}, {k})")
    return (
        math.lgamma(n + 1.0) - math.lgamma(k + 1.0) - math.lgamma(n - k + 1.0)
    )
