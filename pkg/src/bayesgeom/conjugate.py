"""Closed-form norms and compatibilities for the Beta-Bernoulli and
Normal-Inverse-Gamma conjugate families, plus the log-odds Beta variant.

Every expression is assembled from log-Beta / log-normalizer terms and
exponentiated once at the end; raw Beta values are never multiplied.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numerics import log_beta, log_binom

__all__ = [
    "BetaBernoulliModel",
    "NIGParams",
    "bb_prior_norm",
    "bb_posterior_norm",
    "bb_likelihood_norm",
    "bb_kappa_prior_lik",
    "bb_kappa_prior_post",
    "bb_kappa_prior_prior",
    "bb_max_compatible",
    "nig_log_density",
    "nig_norm",
    "nig_kappa",
    "nig_posterior",
    "nig_likelihood_as_nig",
    "canonical_beta_norm",
]


@dataclass(frozen=True)
class BetaBernoulliModel:
    """Beta(a, b) prior with n Bernoulli trials, n1 of them successes.

    a, b > 1/2 is required for the prior norm to exist (B(2a-1, 2b-1) must
    be finite). Posterior parameters are always derived, never stored.
    """

    a: float
    b: float
    n: int = 0
    n1: int = 0

    def __post_init__(self):
        if not (self.a > 0.5 and self.b > 0.5):
            raise DomainError(
                f"Beta prior requires a, b > 1/2 for a finite L2 norm "
                f"(B(2a-1, 2b-1) must exist); got ({self.a}, {self.b})"
            )
        if self.n < 0 or not 0 <= self.n1 <= self.n:
            raise DomainError(
                f"need 0 <= n1 <= n, got n={self.n}, n1={self.n1}"
            )

    @property
    def a_star(self) -> float:
        return self.n1 + self.a

    @property
    def b_star(self) -> float:
        return self.n - self.n1 + self.b


def _beta_norm(a: float, b: float) -> float:
    # ||Beta(a,b)|| = sqrt(B(2a-1, 2b-1)) / B(a, b)
    return math.exp(0.5 * log_beta(2 * a - 1, 2 * b - 1) - log_beta(a, b))


def bb_prior_norm(m: BetaBernoulliModel) -> float:
    """L2 norm of the Beta(a, b) prior density."""
    return _beta_norm(m.a, m.b)


def bb_posterior_norm(m: BetaBernoulliModel) -> float:
    """L2 norm of the Beta(a*, b*) posterior density."""
    return _beta_norm(m.a_star, m.b_star)


def bb_likelihood_norm(m: BetaBernoulliModel, include_coeff: bool = True) -> float:
    """L2 norm of the Bernoulli likelihood in theta.

    The binomial coefficient is included by default; it cancels inside any
    kappa, so compatibilities do not depend on this choice.
    """
    log_norm = 0.5 * log_beta(2 * m.n1 + 1, 2 * (m.n - m.n1) + 1)
    if include_coeff:
        log_norm += log_binom(m.n, m.n1)
    return math.exp(log_norm)


def bb_kappa_prior_lik(m: BetaBernoulliModel) -> float:
    """Prior-likelihood compatibility kappa_{pi, l}(a, b)."""
    return math.exp(
        log_beta(m.a_star, m.b_star)
        - 0.5
        * (
            log_beta(2 * m.a - 1, 2 * m.b - 1)
            + log_beta(2 * m.n1 + 1, 2 * (m.n - m.n1) + 1)
        )
    )


def bb_kappa_prior_post(m: BetaBernoulliModel) -> float:
    """Prior-posterior compatibility kappa_{pi, p}(a, b)."""
    return math.exp(
        log_beta(m.a + m.a_star - 1, m.b + m.b_star - 1)
        - 0.5
        * (
            log_beta(2 * m.a - 1, 2 * m.b - 1)
            + log_beta(2 * m.a_star - 1, 2 * m.b_star - 1)
        )
    )


def bb_kappa_prior_prior(a1: float, b1: float, a2: float, b2: float) -> float:
    """Compatibility between Beta(a1, b1) and Beta(a2, b2) priors."""
    for name, v in (("a1", a1), ("b1", b1), ("a2", a2), ("b2", b2)):
        if not v > 0.5:
            raise DomainError(f"{name} must exceed 1/2 for a finite norm, got {v}")
    return math.exp(
        log_beta(a1 + a2 - 1, b1 + b2 - 1)
        - 0.5 * (log_beta(2 * a1 - 1, 2 * b1 - 1) + log_beta(2 * a2 - 1, 2 * b2 - 1))
    )


def bb_max_compatible(n: int, n1: int) -> tuple[float, float]:
    """Hyperparameters (1 + n1, 1 + n - n1) of the prior proportional to the
    likelihood; its mode (a*-1)/(a*+b*-2) is the ML estimate n1/n."""
    if not 0 <= n1 <= n:
        raise DomainError(f"need 0 <= n1 <= n, got n={n}, n1={n1}")
    return (1.0 + n1, 1.0 + n - n1)


@dataclass(frozen=True)
class NIGParams:
    """Normal-Inverse-Gamma parameters: mu | s2 ~ N(mu0, s2/eta0),
    s2 ~ IG(nu0/2, nu0*sigma0_sq/2)."""

    mu0: float
    eta0: float
    nu0: float
    sigma0_sq: float

    def __post_init__(self):
        for name in ("eta0", "nu0", "sigma0_sq"):
            if not getattr(self, name) > 0:
                raise DomainError(
                    f"NIG parameter {name} must be positive, got {getattr(self, name)}"
                )


def nig_log_density(p: NIGParams, mu, sigma_sq):
    """Log joint density of (mu, sigma_sq); vectorized over both arguments.

    Returns -inf for sigma_sq <= 0.
    """
    mu = np.asarray(mu, dtype=float)
    s2 = np.asarray(sigma_sq, dtype=float)
    out = np.full(np.broadcast(mu, s2).shape, -np.inf)
    ok = s2 > 0
    mu_ok = np.broadcast_to(mu, out.shape)[ok] if out.shape else mu
    s2_ok = np.broadcast_to(s2, out.shape)[ok] if out.shape else s2
    shape = 0.5 * p.nu0
    rate = 0.5 * p.nu0 * p.sigma0_sq
    log_normal = (
        0.5 * (math.log(p.eta0) - math.log(2 * math.pi) - np.log(s2_ok))
        - 0.5 * p.eta0 * (mu_ok - p.mu0) ** 2 / s2_ok
    )
    log_ig = (
        shape * math.log(rate)
        - math.lgamma(shape)
        - (shape + 1.0) * np.log(s2_ok)
        - rate / s2_ok
    )
    if out.shape:
        out[ok] = log_normal + log_ig
        return out
    return float(log_normal + log_ig) if ok else float("-inf")


def _nig_square(p: NIGParams) -> NIGParams:
    # p^2 is proportional to this member's density.
    return NIGParams(
        p.mu0, 2 * p.eta0, 2 * p.nu0 + 3, p.nu0 * p.sigma0_sq / (p.nu0 + 1.5)
    )


def _nig_product(p1: NIGParams, p2: NIGParams) -> NIGParams:
    # p1 * p2 is proportional to this member's density.
    eta = p1.eta0 + p2.eta0
    nu = p1.nu0 + p2.nu0 + 3
    scale = (
        p1.nu0 * p1.sigma0_sq
        + p2.nu0 * p2.sigma0_sq
        + p1.eta0 * p2.eta0 * (p1.mu0 - p2.mu0) ** 2 / eta
    ) / nu
    return NIGParams((p1.eta0 * p1.mu0 + p2.eta0 * p2.mu0) / eta, eta, nu, scale)


_REF_POINT = (0.0, 1.0)


def nig_norm(p: NIGParams) -> float:
    """L2 norm of the NIG density, via the density-ratio identity
    ||p||^2 = p^2/p_sq evaluated at any point."""
    return math.exp(
        nig_log_density(p, *_REF_POINT)
        - 0.5 * nig_log_density(_nig_square(p), *_REF_POINT)
    )


def nig_kappa(p1: NIGParams, p2: NIGParams) -> float:
    """Compatibility between two NIG densities: sqrt(pA * pB) / pC at the
    reference point (mu, sigma_sq) = (0, 1), with pA, pB the squares'
    members and pC the product's member."""
    log_a = nig_log_density(_nig_square(p1), *_REF_POINT)
    log_b = nig_log_density(_nig_square(p2), *_REF_POINT)
    log_c = nig_log_density(_nig_product(p1, p2), *_REF_POINT)
    return math.exp(0.5 * (log_a + log_b) - log_c)


def nig_posterior(p: NIGParams, n: int, ybar: float, ss: float) -> NIGParams:
    """Conjugate update from n observations with mean ybar and centered sum
    of squares ss."""
    if n < 1:
        raise DomainError(f"posterior update needs n >= 1, got {n}")
    if ss < 0:
        raise DomainError(f"sum of squares must be nonnegative, got {ss}")
    eta = p.eta0 + n
    nu = p.nu0 + n
    mu = (n * ybar + p.eta0 * p.mu0) / eta
    scale = (p.nu0 * p.sigma0_sq + ss + p.eta0 * n / eta * (p.mu0 - ybar) ** 2) / nu
    return NIGParams(mu, eta, nu, scale)


def nig_likelihood_as_nig(n: int, ybar: float, ss: float) -> NIGParams:
    """NIG member collinear to the Normal likelihood in (mu, sigma_sq);
    exists only for n > 3 and ss > 0."""
    if n <= 3:
        raise DomainError(
            f"the likelihood is not square-integrable as an NIG member for "
            f"n <= 3 (got n={n})"
        )
    if ss <= 0:
        raise DomainError(f"need positive sum of squares, got {ss}")
    return NIGParams(ybar, float(n), float(n - 3), ss / (n - 3))


def canonical_beta_norm(a: float, b: float) -> float:
    """L2 norm of the conjugate prior on the log-odds parameter:
    sqrt(B(2a, 2b))/B(a, b), finite for all a, b > 0."""
    if not (a > 0 and b > 0):
        raise DomainError(f"log-odds Beta norm requires a, b > 0, got ({a}, {b})")
    return math.exp(0.5 * log_beta(2 * a, 2 * b) - log_beta(a, b))
