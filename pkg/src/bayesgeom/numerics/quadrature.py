"""Deterministic adaptive quadrature on axis-aligned boxes.

The rule is a tensor-product 15-point Kronrod panel with its embedded 7-point
Gauss rule supplying the error estimate; panels are bisected globally
(worst panel first) until the summed error estimate meets tolerance.
Unbounded axes are mapped onto (0, 1) before panelling.

Integrands are vectorized: ``f(pts)`` receives an ``(m, dim)`` float array
and must return an ``(m,)`` array.
"""

import heapq
import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, NanInIntegrandError, QuadratureNonConvergedError

__all__ = [
    "SupportRegion",
    "QuadSpec",
    "QuadResult",
    "LogIntegralResult",
    "integrate",
    "log_integrate",
]

# 15-point Kronrod abscissae on [-1, 1], ascending; the embedded 7-point
# Gauss nodes sit at the odd indices.
_NODES = np.array([
    -0.9914553711208126,
    -0.9491079123427585,
    -0.8648644233597691,
    -0.7415311855993945,
    -0.5860872354676911,
    -0.4058451513773972,
    -0.2077849550078985,
    0.0,
    0.2077849550078985,
    0.4058451513773972,
    0.5860872354676911,
    0.7415311855993945,
    0.8648644233597691,
    0.9491079123427585,
    0.9914553711208126,
])

_W_KRONROD = np.array([
    0.022935322010529224,
    0.063092092629978553,
    0.104790010322250184,
    0.140653259715525919,
    0.169004726639267903,
    0.190350578064785410,
    0.204432940075298892,
    0.209482141084727828,
    0.204432940075298892,
    0.190350578064785410,
    0.169004726639267903,
    0.140653259715525919,
    0.104790010322250184,
    0.063092092629978553,
    0.022935322010529224,
])

# Gauss-7 weights aligned on the 15-node grid (zeros at Kronrod-only nodes),
# so both rules share one batch of integrand evaluations.
_W_GAUSS = np.zeros(15)
_W_GAUSS[1::2] = [
    0.129484966168869693,
    0.279705391489276668,
    0.381830050505118945,
    0.417959183673469388,
    0.381830050505118945,
    0.279705391489276668,
    0.129484966168869693,
]


@dataclass(frozen=True)
class SupportRegion:
    """Axis-aligned box in R^p; +-inf bounds mark unbounded axes."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self):
        lower = tuple(float(x) for x in self.lower)
        upper = tuple(float(x) for x in self.upper)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if len(lower) != len(upper) or len(lower) < 1:
            raise DomainError("region needs matching, nonempty bound vectors")
        for lo, hi in zip(lower, upper):
            if math.isnan(lo) or math.isnan(hi) or not lo < hi:
                raise DomainError(f"invalid axis bounds ({lo}, {hi})")

    @classmethod
    def interval(cls, lo: float, hi: float) -> "SupportRegion":
        return cls((lo,), (hi,))

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def is_bounded(self) -> bool:
        return all(
            math.isfinite(lo) and math.isfinite(hi)
            for lo, hi in zip(self.lower, self.upper)
        )

    def volume(self) -> float:
        if not self.is_bounded:
            raise DomainError("volume of an unbounded region")
        return math.prod(hi - lo for lo, hi in zip(self.lower, self.upper))

    def intersect(self, other: "SupportRegion") -> "SupportRegion | None":
        """Intersection box, or None when it has empty interior."""
        if other.dim != self.dim:
            raise DomainError("dimension mismatch in region intersection")
        lo = tuple(max(a, b) for a, b in zip(self.lower, other.lower))
        hi = tuple(min(a, b) for a, b in zip(self.upper, other.upper))
        if any(l >= h for l, h in zip(lo, hi)):
            return None
        return SupportRegion(lo, hi)

    def contains(self, other: "SupportRegion") -> bool:
        return all(a <= b for a, b in zip(self.lower, other.lower)) and all(
            a >= b for a, b in zip(self.upper, other.upper)
        )


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances and limits for one adaptive integration."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000
    unbounded_transform: str = "rational"

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise DomainError("rel_tol must be positive")
        if self.abs_tol < 0:
            raise DomainError("abs_tol must be nonnegative")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.unbounded_transform not in ("rational", "tangent"):
            raise DomainError(
                f"unknown unbounded_transform {self.unbounded_transform!r}"
            )


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    converged: bool
    subdivisions: int
    neval: int

    def require_converged(self, what: str = "integral") -> float:
        if not self.converged:
            raise QuadratureNonConvergedError(
                f"{what} did not converge: estimate {self.value} "
                f"+- {self.error} after subdivision budget",
                self.value,
                self.error,
            )
        return self.value


@dataclass(frozen=True)
class LogIntegralResult:
    log_value: float
    rel_error: float
    converged: bool

    def require_converged(self, what: str = "log-integral") -> float:
        if not self.converged:
            raise QuadratureNonConvergedError(
                f"{what} did not converge (log estimate {self.log_value})",
                self.log_value,
                self.rel_error,
            )
        return self.log_value


def _axis_segments(lo: float, hi: float, transform: str) -> list[tuple]:
    """Map one axis onto one or two t-in-(0,1) segments."""
    lo_inf = math.isinf(lo)
    hi_inf = math.isinf(hi)
    if not lo_inf and not hi_inf:
        return [("affine", lo, hi)]
    if transform == "rational":
        # x = a + t/(1-t); doubly infinite axes split at 0.
        if lo_inf and hi_inf:
            return [("rat_neg", 0.0, 0.0), ("rat_pos", 0.0, 0.0)]
        if hi_inf:
            return [("rat_pos", lo, 0.0)]
        return [("rat_neg", hi, 0.0)]
    if lo_inf and hi_inf:
        return [("tan_full", 0.0, 0.0)]
    if hi_inf:
        return [("tan_pos", lo, 0.0)]
    return [("tan_neg", hi, 0.0)]


def _map_axis(segment: tuple, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map t in (0,1) to axis coordinates; returns (x, jacobian).

    Nodes are interior, but deep subdivision can round t to exactly 1; such
    nodes get jacobian 0 (the continuous limit for integrable functions)
    and a finite placeholder coordinate.
    """
    kind, p, q = segment
    if kind == "affine":
        # keep nodes strictly interior: deep panels may round onto the
        # boundary, where integrable singularities would evaluate as inf
        x = np.clip(
            p + (q - p) * t,
            np.nextafter(min(p, q), max(p, q)),
            np.nextafter(max(p, q), min(p, q)),
        )
        return x, np.full_like(t, q - p)
    if kind in ("rat_pos", "rat_neg"):
        u = 1.0 - t
        bad = u <= 0.0
        u = np.where(bad, 1.0, u)
        x = p + t / u if kind == "rat_pos" else p - t / u
        jac = 1.0 / (u * u)
        if bad.any():
            x = np.where(bad, p, x)
            jac = np.where(bad, 0.0, jac)
        return x, jac
    if kind == "tan_full":
        s = np.pi * (t - 0.5)
    else:
        s = 0.5 * np.pi * t
    c = np.cos(s)
    bad = c <= 0.0
    c = np.where(bad, 1.0, c)
    tan = np.tan(np.where(bad, 0.0, s))
    scale = np.pi if kind == "tan_full" else 0.5 * np.pi
    jac = np.where(bad, 0.0, scale / (c * c))
    if kind == "tan_neg":
        return p - tan, jac
    if kind == "tan_pos":
        return p + tan, jac
    return tan, jac


# fraction of a panel's t-width between the outermost node and the edge
_EDGE_GAP = 0.5 * (1.0 - 0.9914553711208126)

# panels touching a transformed infinite edge stop refining along that axis
# at this width: any narrower and nodes start rounding onto the edge,
# silently evaporating tail mass. 2^-40 resolves tails out to x ~ 1e12.
_MIN_TAIL_WIDTH = 2.0**-40

# panel edges whose image is at infinity, per segment kind
_INF_EDGES = {
    "affine": (),
    "rat_pos": (1,),
    "rat_neg": (1,),
    "tan_pos": (1,),
    "tan_neg": (1,),
    "tan_full": (0, 1),
}


def _panel_nodes(cell: tuple, lo: np.ndarray, hi: np.ndarray):
    """Node grid and per-axis weight/jacobian vectors for one t-panel."""
    dim = len(cell)
    axes_x = []
    axes_wk = []
    axes_wg = []
    axes_jac = []
    for i in range(dim):
        half = 0.5 * (hi[i] - lo[i])
        mid = 0.5 * (hi[i] + lo[i])
        t = mid + half * _NODES
        x, jac = _map_axis(cell[i], t)
        axes_x.append(x)
        axes_wk.append(_W_KRONROD * half * jac)
        axes_wg.append(_W_GAUSS * half * jac)
        axes_jac.append(jac)
    grids = np.meshgrid(*axes_x, indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    return pts, axes_wk, axes_wg, axes_jac


# the outermost-node level must exceed the panel average by this factor
# before a finite-boundary sliver is charged (detects edge singularities
# without taxing smooth integrands)
_EDGE_GROWTH = 8.0

# panel edges lying on the finite boundary of the original region
_BOUNDARY_EDGES = {
    "affine": (0, 1),
    "rat_pos": (0,),
    "rat_neg": (0,),
    "tan_pos": (0,),
    "tan_neg": (0,),
    "tan_full": (),
}


def _tail_estimate(cell, lo, hi, grid_abs, axes_wk, axes_jac) -> float:
    """Mass estimate for the sliver between the outermost node and the
    panel edge.

    Charged always at transformed infinite edges (so non-integrable tails
    keep the error alive instead of silently truncating) and at finite
    region boundaries only when the integrand grows toward them (so
    integrable endpoint singularities refine honestly while smooth
    integrands pay nothing).
    """
    dim = len(cell)
    tail = 0.0
    for i in range(dim):
        kind = cell[i][0]
        inf_edges = [
            e
            for e in _INF_EDGES[kind]
            if (hi[i] == 1.0 if e == 1 else lo[i] == 0.0)
        ]
        bnd_edges = [
            e
            for e in _BOUNDARY_EDGES[kind]
            if (hi[i] == 1.0 if e == 1 else lo[i] == 0.0)
        ]
        if not inf_edges and not bnd_edges:
            continue
        # contract every axis except i (descending keeps indices stable)
        profile = grid_abs
        for j in range(dim - 1, -1, -1):
            if j != i:
                profile = np.tensordot(profile, axes_wk[j], axes=([j], [0]))
        measure = float(np.sum(axes_wk[i]))
        mean_level = float(profile @ axes_wk[i]) / measure if measure > 0 else 0.0
        gap = (hi[i] - lo[i]) * _EDGE_GAP
        for edge in inf_edges:
            idx = 14 if edge == 1 else 0
            tail += float(profile[idx] * gap * axes_jac[i][idx])
        for edge in bnd_edges:
            idx = 14 if edge == 1 else 0
            if profile[idx] > _EDGE_GROWTH * mean_level:
                tail += float(profile[idx] * gap * axes_jac[i][idx])
    return tail


def _eval_panel(f, cell: tuple, lo: np.ndarray, hi: np.ndarray):
    dim = len(cell)
    pts, axes_wk, axes_wg, axes_jac = _panel_nodes(cell, lo, hi)
    vals = np.asarray(f(pts), dtype=float)
    if vals.shape != (pts.shape[0],):
        raise DomainError(
            f"integrand returned shape {vals.shape}, expected ({pts.shape[0]},)"
        )
    if np.isnan(vals).any():
        raise NanInIntegrandError("integrand produced NaN at a quadrature node")
    grid = vals.reshape((15,) * dim)
    k_val = grid
    g_val = grid
    for i in range(dim):
        k_val = np.tensordot(k_val, axes_wk[i], axes=([0], [0]))
        g_val = np.tensordot(g_val, axes_wg[i], axes=([0], [0]))
    k_val = float(k_val)
    err = abs(k_val - float(g_val)) + _tail_estimate(
        cell, lo, hi, np.abs(grid), axes_wk, axes_jac
    )
    return k_val, err, pts.shape[0]


def _at_tail_floor(cell, lo, hi, axis) -> bool:
    """True when the split axis touches a transformed infinite edge and is
    already at the minimum tail width."""
    if hi[axis] - lo[axis] > _MIN_TAIL_WIDTH:
        return False
    for edge in _INF_EDGES[cell[axis][0]]:
        if (edge == 1 and hi[axis] == 1.0) or (edge == 0 and lo[axis] == 0.0):
            return True
    return False


def _initial_panels(dim: int):
    """Each cell starts pre-bisected once per axis so narrow peaks between
    the top-level nodes are still seen."""
    halves = [((0.0, 0.5), (0.5, 1.0))] * dim
    for combo in itertools.product(*halves):
        lo = np.array([c[0] for c in combo])
        hi = np.array([c[1] for c in combo])
        yield lo, hi


def integrate(f, region: SupportRegion, spec: QuadSpec | None = None) -> QuadResult:
    """Adaptive panel integration of a vectorized integrand over a box.

    Returns the estimate with its error bound; ``converged`` is False when
    the subdivision budget ran out first. Deterministic for fixed inputs.
    """
    spec = spec or QuadSpec()
    if region.dim > 3:
        raise DomainError(
            f"tensor-product rule supports dim <= 3, got {region.dim} "
            "(use Monte Carlo estimators for higher dimensions)"
        )
    cells = list(
        itertools.product(
            *[
                _axis_segments(lo, hi, spec.unbounded_transform)
                for lo, hi in zip(region.lower, region.upper)
            ]
        )
    )

    heap = []
    seq = itertools.count()
    neval = 0
    for cell in cells:
        for lo, hi in _initial_panels(region.dim):
            val, err, n = _eval_panel(f, cell, lo, hi)
            neval += n
            heapq.heappush(heap, (-err, next(seq), val, err, cell, lo, hi))

    total = math.fsum(item[2] for item in heap)
    total_err = math.fsum(item[3] for item in heap)
    splits = 0
    frozen: list[tuple[float, float]] = []
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if splits >= spec.max_subdivisions or not heap:
            break
        if not (math.isfinite(total) and math.isfinite(total_err)):
            break
        _, _, val, err, cell, lo, hi = heapq.heappop(heap)
        axis = int(np.argmax(hi - lo))
        mid = 0.5 * (lo[axis] + hi[axis])
        if not lo[axis] < mid < hi[axis] or _at_tail_floor(cell, lo, hi, axis):
            # resolution floor: this panel's error cannot be reduced
            frozen.append((val, err))
            continue
        for new_lo, new_hi in (
            (lo, np.where(np.arange(len(hi)) == axis, mid, hi)),
            (np.where(np.arange(len(lo)) == axis, mid, lo), hi),
        ):
            child_val, child_err, n = _eval_panel(f, cell, new_lo, new_hi)
            neval += n
            total += child_val
            total_err += child_err
            heapq.heappush(
                heap, (-child_err, next(seq), child_val, child_err, cell, new_lo, new_hi)
            )
        total -= val
        total_err -= err
        splits += 1

    value = math.fsum(
        [item[2] for item in heap] + [val for val, _ in frozen]
    )
    error = math.fsum(
        [item[3] for item in heap] + [err for _, err in frozen]
    )
    converged = error <= max(spec.abs_tol, spec.rel_tol * abs(value))
    return QuadResult(value, error, converged, splits, neval)


def log_integrate(
    log_f, region: SupportRegion, spec: QuadSpec | None = None
) -> LogIntegralResult:
    """Integrate exp(log_f) with max-shift stabilization.

    The shift starts from the log-integrand maximum over the initial panel
    grids and is re-raised (and the integration rerun) if refinement finds
    appreciably larger values, so the exponentiation can neither overflow
    nor drown in abs_tol.
    """
    spec = spec or QuadSpec()
    cells = list(
        itertools.product(
            *[
                _axis_segments(lo, hi, spec.unbounded_transform)
                for lo, hi in zip(region.lower, region.upper)
            ]
        )
    )
    shift = -math.inf
    for cell in cells:
        for lo, hi in _initial_panels(region.dim):
            pts, _, _, _ = _panel_nodes(cell, lo, hi)
            lv = np.asarray(log_f(pts), dtype=float)
            if np.isnan(lv).any():
                raise NanInIntegrandError("log-integrand produced NaN")
            if lv.size:
                shift = max(shift, float(np.max(lv)))
    if shift == -math.inf:
        return LogIntegralResult(-math.inf, 0.0, True)

    for _ in range(5):
        seen = {"max": -math.inf}

        def shifted(pts, _shift=shift, _seen=seen):
            lv = np.asarray(log_f(pts), dtype=float)
            if lv.size:
                m = float(np.max(lv))
                if m > _seen["max"]:
                    _seen["max"] = m
            return np.exp(np.minimum(lv - _shift, 700.0))

        res = integrate(shifted, region, spec)
        if seen["max"] <= shift + 100.0:
            break
        shift = seen["max"]
    if res.value <= 0.0:
        return LogIntegralResult(-math.inf, res.error, res.converged)
    rel_error = res.error / res.value
    return LogIntegralResult(math.log(res.value) + shift, rel_error, res.converged)
