"""Vectorized log-densities and ScalarField builders for the distributions
the package works with."""

import math

import numpy as np

from .conjugate import NIGParams, nig_log_density
from .errors import DomainError
from .geometry import ScalarField
from .numerics import SupportRegion, log_beta, log_binom

__all__ = [
    "log_beta_pdf",
    "log_normal_pdf",
    "log_laplace_pdf",
    "log_uniform_pdf",
    "log_bernoulli_lik",
    "log_canonical_beta_pdf",
    "uniform_field",
    "beta_field",
    "normal_field",
    "bernoulli_likelihood_field",
    "nig_field",
    "canonical_beta_field",
    "scaled_field",
    "linearly_reparametrized_field",
]


def log_beta_pdf(x, a, b):
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, -np.inf)
    ok = (x > 0) & (x < 1)
    xv = x[ok]
    out[ok] = (a - 1) * np.log(xv) + (b - 1) * np.log1p(-xv) - log_beta(a, b)
    return out


def log_normal_pdf(x, mean, var):
    x = np.asarray(x, dtype=float)
    return -0.5 * (math.log(2 * math.pi * var) + (x - mean) ** 2 / var)


def log_laplace_pdf(x, loc, scale):
    x = np.asarray(x, dtype=float)
    return -math.log(2 * scale) - np.abs(x - loc) / scale


def log_uniform_pdf(x, lo, hi):
    x = np.asarray(x, dtype=float)
    return np.where((x > lo) & (x < hi), -math.log(hi - lo), -np.inf)


def log_bernoulli_lik(theta, n, n1, include_coeff=True):
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape)
    const = log_binom(n, n1) if include_coeff else 0.0
    inside = (theta > 0) & (theta < 1)
    tv = theta[inside]
    with np.errstate(invalid="ignore"):
        out[inside] = n1 * np.log(tv) + (n - n1) * np.log1p(-tv) + const
    # boundary: theta in {0,1} gives likelihood 0 unless the exponent is 0
    at0 = theta <= 0
    at1 = theta >= 1
    out[at0] = const if n1 == 0 else -np.inf
    out[at1] = const if n1 == n else -np.inf
    return out


def log_canonical_beta_pdf(eta, a, b):
    """Conjugate prior for the Bernoulli log-odds:
    exp(a*eta - (a+b)*log(1+e^eta)) / B(a, b)."""
    eta = np.asarray(eta, dtype=float)
    softplus = np.logaddexp(0.0, eta)
    return a * eta - (a + b) * softplus - log_beta(a, b)


def uniform_field(lo: float, hi: float, kind: str = "prior") -> ScalarField:
    if not lo < hi:
        raise DomainError(f"need lo < hi, got ({lo}, {hi})")
    support = SupportRegion.interval(lo, hi)
    return ScalarField(
        lambda pts: log_uniform_pdf(pts[:, 0], lo, hi), support, kind, check_l2=False
    )


def beta_field(a: float, b: float, kind: str = "prior") -> ScalarField:
    if not (a > 0.5 and b > 0.5):
        raise DomainError(
            f"Beta field requires a, b > 1/2 for square-integrability, got ({a}, {b})"
        )
    return ScalarField(
        lambda pts: log_beta_pdf(pts[:, 0], a, b),
        SupportRegion.interval(0.0, 1.0),
        kind,
        check_l2=False,
    )


def normal_field(mean: float, var: float, kind: str = "prior") -> ScalarField:
    if not var > 0:
        raise DomainError(f"variance must be positive, got {var}")
    return ScalarField(
        lambda pts: log_normal_pdf(pts[:, 0], mean, var),
        SupportRegion.interval(-math.inf, math.inf),
        kind,
        check_l2=False,
    )


def bernoulli_likelihood_field(
    n: int, n1: int, include_coeff: bool = True
) -> ScalarField:
    if not 0 <= n1 <= n:
        raise DomainError(f"need 0 <= n1 <= n, got ({n}, {n1})")
    return ScalarField(
        lambda pts: log_bernoulli_lik(pts[:, 0], n, n1, include_coeff),
        SupportRegion.interval(0.0, 1.0),
        "likelihood",
        check_l2=False,
    )


def nig_field(p: NIGParams, kind: str = "prior") -> ScalarField:
    """Joint (mu, sigma_sq) field on R x (0, inf)."""
    support = SupportRegion((-math.inf, 0.0), (math.inf, math.inf))
    return ScalarField(
        lambda pts: nig_log_density(p, pts[:, 0], pts[:, 1]),
        support,
        kind,
        check_l2=False,
    )


def canonical_beta_field(a: float, b: float, kind: str = "prior") -> ScalarField:
    if not (a > 0 and b > 0):
        raise DomainError(f"need a, b > 0, got ({a}, {b})")
    return ScalarField(
        lambda pts: log_canonical_beta_pdf(pts[:, 0], a, b),
        SupportRegion.interval(-math.inf, math.inf),
        kind,
        check_l2=False,
    )


def scaled_field(g: ScalarField, c: float) -> ScalarField:
    """c * g for c > 0 (kappa must not notice)."""
    if not c > 0:
        raise DomainError(f"scale must be positive, got {c}")
    log_c = math.log(c)
    return ScalarField(
        lambda pts: g.eval_log(pts) + log_c, g.support, g.kind, check_l2=False
    )


def linearly_reparametrized_field(g: ScalarField, scale: float, shift: float) -> ScalarField:
    """Push a one-dimensional field through theta -> scale*theta + shift
    (scale > 0), with the Jacobian so densities stay densities."""
    if g.support.dim != 1:
        raise DomainError("linear reparametrization helper is one-dimensional")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale}")
    lo, hi = g.support.lower[0], g.support.upper[0]
    support = SupportRegion.interval(scale * lo + shift, scale * hi + shift)
    log_scale = math.log(scale)

    def eval_log(pts):
        back = (pts[:, 0] - shift) / scale
        return g.eval_log(back[:, None]) - log_scale

    return ScalarField(eval_log, support, g.kind, check_l2=False)
