"""Conjugate exponential-family machinery: normalizers K(tau, n0) by
quadrature, the compatibility and affine-compatibility triplets expressed
through them, and the data-dependent max-compatible prior.

A family is f(y | theta) = h(y) exp{eta(theta)' T(y) - A(eta(theta))} with
conjugate prior pi(theta | tau, n0) = K(tau, n0) exp{tau' eta - n0 A(eta)}
and posterior member (tau + sum T(Y_i), n0 + n).
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, ImproperMemberError
from .numerics import QuadSpec, SupportRegion, log_integrate

__all__ = [
    "ExpFamSpec",
    "ConjugateHyper",
    "log_K",
    "sum_stats",
    "ef_kappa",
    "ef_affine_kappa",
    "ef_max_compatible",
    "bernoulli_canonical",
    "normal_known_variance",
    "get_family",
    "FAMILY_REGISTRY",
]


@dataclass(frozen=True)
class ConjugateHyper:
    """Hyperparameters (tau, n0) of one conjugate-family member. n0 is a
    real parameter, not a count."""

    tau: tuple[float, ...]
    n0: float

    def __post_init__(self):
        object.__setattr__(self, "tau", tuple(float(t) for t in self.tau))
        if len(self.tau) < 1:
            raise DomainError("tau must have at least one component")


@dataclass(frozen=True)
class ExpFamSpec:
    """Callable pieces of one exponential family.

    ``suff_stat`` maps a single observation to a length-q vector;
    ``log_cumulant`` and ``eta_of_theta`` are vectorized over ``(m, q)`` /
    ``(m, p)`` arrays. ``eta_of_theta`` is the identity for canonical
    parametrizations.
    """

    name: str
    log_h: Callable
    suff_stat: Callable
    log_cumulant: Callable
    eta_of_theta: Callable
    theta_support: SupportRegion
    q: int = 1

    def __post_init__(self):
        if self.q < 1 or self.q > 3:
            raise DomainError(
                f"sufficient statistics of dimension {self.q} are not "
                "supported (quadrature uses the tensor rule, q <= 3)"
            )

    def hyper(
        self, tau, n0: float, quad: QuadSpec | None = None
    ) -> ConjugateHyper:
        """Build hyperparameters, probing that K(tau, n0) is finite."""
        h = ConjugateHyper(tuple(np.atleast_1d(np.asarray(tau, dtype=float))), float(n0))
        log_K(self, h, quad)
        return h


def _log_prior_kernel(spec: ExpFamSpec, tau: np.ndarray, n0: float):
    def kernel(pts):
        eta = np.asarray(spec.eta_of_theta(pts), dtype=float)
        if eta.ndim == 1:
            eta = eta[:, None]
        return eta @ tau - n0 * np.asarray(spec.log_cumulant(eta), dtype=float)

    return kernel


def log_K(
    spec: ExpFamSpec, h: ConjugateHyper, quad: QuadSpec | None = None
) -> float:
    """log K(tau, n0), the log of the reciprocal normalizing integral."""
    tau = np.asarray(h.tau, dtype=float)
    if tau.shape != (spec.q,):
        raise DomainError(
            f"tau has dimension {tau.shape[0]}, family {spec.name!r} needs {spec.q}"
        )
    res = log_integrate(_log_prior_kernel(spec, tau, h.n0), spec.theta_support, quad)
    if not res.converged or not math.isfinite(res.log_value):
        raise ImproperMemberError(
            f"K(tau={h.tau}, n0={h.n0}) diverges for family {spec.name!r}: "
            "improper conjugate member"
        )
    return -res.log_value


def sum_stats(spec: ExpFamSpec, data) -> tuple[np.ndarray, int]:
    """(sum of sufficient statistics, sample size) for a raw sample."""
    data = list(np.atleast_1d(np.asarray(data)))
    total = np.zeros(spec.q)
    for y in data:
        total += np.atleast_1d(np.asarray(spec.suff_stat(y), dtype=float))
    return total, len(data)


_WHICH = ("prior_lik", "prior_post", "post_lik")


def _kappa_terms(tau, n0, st, n, which, affine):
    """The three (tau, n0) argument pairs of each compatibility identity,
    ordered (numerator-left, numerator-right, denominator)."""
    t_post = tau + st
    n_post = n0 + n
    if not affine:
        table = {
            "prior_lik": ((2 * tau, 2 * n0), (2 * st, 2 * n), (t_post, n_post)),
            "prior_post": (
                (2 * tau, 2 * n0),
                (2 * t_post, 2 * n_post),
                (2 * tau + st, 2 * n0 + n),
            ),
            "post_lik": (
                (2 * t_post, 2 * n_post),
                (2 * st, 2 * n),
                (tau + 2 * st, n0 + 2 * n),
            ),
        }
    else:
        table = {
            "prior_lik": ((tau, n0), (st, n), (0.5 * t_post, 0.5 * n_post)),
            "prior_post": (
                (tau, n0),
                (t_post, n_post),
                (tau + 0.5 * st, n0 + 0.5 * n),
            ),
            "post_lik": (
                (t_post, n_post),
                (st, n),
                (0.5 * tau + st, 0.5 * n0 + n),
            ),
        }
    return table[which]


def _ef_kappa_impl(spec, h, data, which, quad, affine):
    if which not in _WHICH:
        raise DomainError(f"which must be one of {_WHICH}, got {which!r}")
    tau = np.asarray(h.tau, dtype=float)
    st, n = sum_stats(spec, data)
    terms = _kappa_terms(tau, h.n0, st, n, which, affine)
    logs = []
    for pair_tau, pair_n0 in terms:
        logs.append(log_K(spec, ConjugateHyper(tuple(pair_tau), pair_n0), quad))
    return math.exp(0.5 * (logs[0] + logs[1]) - logs[2])


def ef_kappa(
    spec: ExpFamSpec,
    h: ConjugateHyper,
    data,
    which: str,
    quad: QuadSpec | None = None,
) -> float:
    """Compatibility (prior_lik, prior_post or post_lik) as a ratio of
    normalizing constants of family members."""
    return _ef_kappa_impl(spec, h, data, which, quad, affine=False)


def ef_affine_kappa(
    spec: ExpFamSpec,
    h: ConjugateHyper,
    data,
    which: str,
    quad: QuadSpec | None = None,
) -> float:
    """Affine compatibility (between pointwise square roots); uses the
    halved-argument normalizers, which can exist where the doubled ones do
    not."""
    return _ef_kappa_impl(spec, h, data, which, quad, affine=True)


def ef_max_compatible(
    spec: ExpFamSpec, data, quad: QuadSpec | None = None
) -> ConjugateHyper:
    """The data-dependent member (sum T(Y_i), n); prior-likelihood
    compatibility equals 1 there."""
    st, n = sum_stats(spec, data)
    return spec.hyper(st, float(n), quad)


def bernoulli_canonical() -> ExpFamSpec:
    """Bernoulli with the log-odds as canonical parameter; the conjugate
    prior with (tau, n0) = (a, a+b) matches the log-odds Beta prior."""

    def log_cumulant(eta):
        eta = np.asarray(eta, dtype=float)
        return np.logaddexp(0.0, eta[..., 0] if eta.ndim > 1 else eta)

    return ExpFamSpec(
        name="bernoulli-canonical",
        log_h=lambda y: 0.0,
        suff_stat=lambda y: np.array([float(y)]),
        log_cumulant=log_cumulant,
        eta_of_theta=lambda pts: pts,
        theta_support=SupportRegion.interval(-math.inf, math.inf),
        q=1,
    )


def normal_known_variance(sigma_sq: float = 1.0) -> ExpFamSpec:
    """Normal mean model with known variance, canonical in theta:
    T(y) = y/sigma_sq, A(theta) = theta^2/(2 sigma_sq)."""
    if not sigma_sq > 0:
        raise DomainError(f"sigma_sq must be positive, got {sigma_sq}")

    def log_cumulant(eta):
        eta = np.asarray(eta, dtype=float)
        e = eta[..., 0] if eta.ndim > 1 else eta
        return 0.5 * e * e / sigma_sq

    def log_h(y):
        return -0.5 * (y * y / sigma_sq + math.log(2 * math.pi * sigma_sq))

    return ExpFamSpec(
        name="normal-known-variance",
        log_h=log_h,
        suff_stat=lambda y: np.array([float(y) / sigma_sq]),
        log_cumulant=log_cumulant,
        eta_of_theta=lambda pts: pts,
        theta_support=SupportRegion.interval(-math.inf, math.inf),
        q=1,
    )


FAMILY_REGISTRY: dict[str, Callable[..., ExpFamSpec]] = {
    "bernoulli-canonical": bernoulli_canonical,
    "normal-known-variance": normal_known_variance,
}


def get_family(name: str, params: dict | None = None) -> ExpFamSpec:
    """Look up a built-in family by registry name."""
    if name not in FAMILY_REGISTRY:
        raise DomainError(
            f"unknown family {name!r}; built-ins: {sorted(FAMILY_REGISTRY)}"
        )
    return FAMILY_REGISTRY[name](**(params or {}))
