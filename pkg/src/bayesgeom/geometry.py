"""Vectors in L2 over the parameter space: inner product, norm, angle,
compatibility and its local/affine variants, all through the quadrature
oracle."""

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, NotSquareIntegrableError, ZeroNormError
from .numerics import QuadSpec, SupportRegion, integrate

__all__ = [
    "ScalarField",
    "GeomSummary",
    "PythagorasCheck",
    "inner_product",
    "norm",
    "compatibility",
    "local_compatibility",
    "affine_compatibility",
    "pythagoras_check",
    "entropy_functional",
]

# Loose probe used only to reject fields that are not square-integrable.
_PROBE_SPEC = QuadSpec(rel_tol=1e-4, abs_tol=1e-8, max_subdivisions=400)


@dataclass(frozen=True)
class ScalarField:
    """A nonnegative function on a box, held in log form.

    ``eval_log`` is vectorized: it receives an ``(m, dim)`` array of points
    and returns the ``(m,)`` array of log values (-inf where the function
    vanishes). Fields are immutable; evaluation must be pure.

    Construction probes square-integrability over the support unless
    ``check_l2=False``; disabling the probe is how likelihoods that are only
    locally square-integrable (used by :func:`local_compatibility`) get
    built.
    """

    eval_log: Callable[[np.ndarray], np.ndarray]
    support: SupportRegion
    kind: str = "generic"
    check_l2: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.kind not in ("prior", "likelihood", "posterior", "generic"):
            raise DomainError(f"unknown field kind {self.kind!r}")
        if self.check_l2:
            probe = integrate(
                lambda pts: _sq_integrand(self.eval_log, pts),
                self.support,
                _PROBE_SPEC,
            )
            if not probe.converged or not math.isfinite(probe.value):
                raise NotSquareIntegrableError(
                    "square-integrability probe failed: integral of the "
                    f"squared field estimated at {probe.value} without "
                    "converging"
                )

    def log_at(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.asarray(self.eval_log(pts), dtype=float)


def _sq_integrand(eval_log, pts):
    return np.exp(2.0 * np.asarray(eval_log(pts), dtype=float))


def _prod_integrand(log_g, log_h, pts, scale=1.0):
    return np.exp(
        scale
        * (np.asarray(log_g(pts), dtype=float) + np.asarray(log_h(pts), dtype=float))
    )


class GeomSummary(NamedTuple):
    """Norms, inner product, compatibility and angle for one field pair.

    ``kappa`` is clamped to [0, 1]; ``kappa_raw`` keeps the unclamped
    quadrature value so jitter past the bounds stays visible.
    """

    norm_g: float
    norm_h: float
    inner: float
    kappa: float
    angle_deg: float
    kappa_raw: float


class PythagorasCheck(NamedTuple):
    norm_sq: float
    decomposition: float
    residual: float


def inner_product(
    g: ScalarField, h: ScalarField, spec: QuadSpec | None = None
) -> float:
    """<g, h> over the intersection of the supports (zero elsewhere)."""
    region = g.support.intersect(h.support)
    if region is None:
        return 0.0
    res = integrate(
        lambda pts: _prod_integrand(g.eval_log, h.eval_log, pts), region, spec
    )
    return res.require_converged("inner product")


def norm(g: ScalarField, spec: QuadSpec | None = None) -> float:
    """L2 norm sqrt(<g, g>) over the field's support."""
    res = integrate(lambda pts: _sq_integrand(g.eval_log, pts), g.support, spec)
    return math.sqrt(res.require_converged("squared norm"))


def _summary(norm_g: float, norm_h: float, inner: float) -> GeomSummary:
    if norm_g <= 0.0 or norm_h <= 0.0:
        raise ZeroNormError(
            f"compatibility undefined for zero-norm input (norms {norm_g}, {norm_h})"
        )
    kappa_raw = inner / (norm_g * norm_h)
    kappa = min(max(kappa_raw, 0.0), 1.0)
    angle = math.degrees(math.acos(kappa))
    return GeomSummary(norm_g, norm_h, inner, kappa, angle, kappa_raw)


def compatibility(
    g: ScalarField, h: ScalarField, spec: QuadSpec | None = None
) -> GeomSummary:
    """kappa = <g,h>/(||g|| ||h||) with the full geometric summary."""
    return _summary(norm(g, spec), norm(h, spec), inner_product(g, h, spec))


def local_compatibility(
    pi: ScalarField, ell: ScalarField, spec: QuadSpec | None = None
) -> float:
    """Compatibility with the likelihood norm restricted to the prior's
    support, for likelihoods that are square-integrable there but not
    globally."""
    support_pi = pi.support
    region = support_pi.intersect(ell.support)
    inner = 0.0
    if region is not None:
        inner = integrate(
            lambda pts: _prod_integrand(pi.eval_log, ell.eval_log, pts),
            region,
            spec,
        ).require_converged("inner product")
    norm_pi = norm(pi, spec)
    if region is None:
        return 0.0
    sq = integrate(lambda pts: _sq_integrand(ell.eval_log, pts), region, spec)
    if not sq.converged:
        raise NotSquareIntegrableError(
            "likelihood is not square-integrable over the prior's support "
            f"(estimate {sq.value} without convergence)"
        )
    norm_ell_local = math.sqrt(sq.value)
    return _summary(norm_pi, norm_ell_local, inner).kappa


def affine_compatibility(
    g: ScalarField, h: ScalarField, spec: QuadSpec | None = None
) -> float:
    """Compatibility of the pointwise square roots.

    For two probability densities both root norms are 1 and this is the
    Hellinger affinity; it is invariant to monotone increasing
    reparametrization.
    """
    region = g.support.intersect(h.support)
    inner = 0.0
    if region is not None:
        inner = integrate(
            lambda pts: _prod_integrand(g.eval_log, h.eval_log, pts, scale=0.5),
            region,
            spec,
        ).require_converged("root inner product")
    ng = math.sqrt(
        integrate(
            lambda pts: np.exp(np.asarray(g.eval_log(pts), dtype=float)),
            g.support,
            spec,
        ).require_converged("integral of g")
    )
    nh = math.sqrt(
        integrate(
            lambda pts: np.exp(np.asarray(h.eval_log(pts), dtype=float)),
            h.support,
            spec,
        ).require_converged("integral of h")
    )
    return _summary(ng, nh, inner).kappa


def pythagoras_check(
    pi: ScalarField, region: SupportRegion, spec: QuadSpec | None = None
) -> PythagorasCheck:
    """Check ||pi||^2 = ||pi - u||^2 + ||u||^2 against the uniform density u
    on ``region``; returns both sides and the residual."""
    if not region.is_bounded:
        raise DomainError("the uniform reference requires a bounded region")
    if not region.contains(pi.support):
        raise DomainError("field support must lie within the reference region")
    u = 1.0 / region.volume()

    norm_sq = integrate(
        lambda pts: _sq_integrand(pi.eval_log, pts), region, spec
    ).require_converged("squared norm")

    def centered_sq(pts):
        return (np.exp(np.asarray(pi.eval_log(pts), dtype=float)) - u) ** 2

    deviation = integrate(centered_sq, region, spec).require_converged(
        "squared deviation from uniform"
    )
    decomposition = deviation + u
    return PythagorasCheck(norm_sq, decomposition, abs(norm_sq - decomposition))


def entropy_functional(pi: ScalarField, spec: QuadSpec | None = None) -> float:
    """Differential entropy -int pi log pi, with the integrand set to 0
    where the density vanishes (x log x -> 0)."""

    def integrand(pts):
        lv = np.asarray(pi.eval_log(pts), dtype=float)
        with np.errstate(invalid="ignore"):
            vals = np.where(np.isneginf(lv), 0.0, -np.exp(lv) * lv)
        return vals

    return integrate(integrand, pi.support, spec).require_converged("entropy")
