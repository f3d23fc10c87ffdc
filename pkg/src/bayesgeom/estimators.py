"""Monte Carlo estimation of the geometric quantities from prior and
posterior draws: the unstable harmonic-mean form, the stable prior-mean
form with running traces, and the full posterior/prior mean suite with
batch-means standard errors.

All expectations are computed in the log domain with max-shift
stabilization; estimates are exponentiated once at the end.
"""

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .densities import log_bernoulli_lik, log_beta_pdf
from .errors import DomainError, EstimatorInputError

__all__ = [
    "SampleBatch",
    "RunningTrace",
    "TargetEstimate",
    "CompatReport",
    "MetropolisResult",
    "SUITE_TARGETS",
    "sample_direct_beta",
    "rw_metropolis",
    "beta_bernoulli_batch",
    "kappa_pp_harmonic",
    "kappa_pp_stable",
    "postmean_suite",
    "kappa_pi1_pi2_mc",
    "save_draws_csv",
    "load_draws_csv",
]

SUITE_TARGETS = (
    "norm_p",
    "norm_pi",
    "norm_lik_local",
    "kappa_pi_lik_local",
    "kappa_pi_p",
    "kappa_pi1_pi2",
    "kappa_lik_p_local",
)

_N_BATCHES = 40
_ESS_WARN = 100.0


@dataclass(frozen=True)
class SampleBatch:
    """Tagged draws plus log-density evaluators.

    Draw arrays are ``(B, d)``; evaluators are vectorized ``(m, d) -> (m,)``.
    Streams an operation does not need may be None. ``prior2`` carries a
    second prior for prior-prior compatibility.
    """

    posterior_draws: np.ndarray | None
    prior_draws: np.ndarray | None
    log_prior: Callable | None
    log_lik: Callable | None
    seed: int
    method: str = "direct"
    prior2_draws: np.ndarray | None = None
    log_prior2: Callable | None = None

    def __post_init__(self):
        if self.method not in ("direct", "rw_metropolis"):
            raise DomainError(f"unknown sampling method {self.method!r}")
        for name in ("posterior_draws", "prior_draws", "prior2_draws"):
            arr = getattr(self, name)
            if arr is None:
                continue
            arr = np.atleast_2d(np.asarray(arr, dtype=float))
            if arr.shape[0] < 1:
                raise EstimatorInputError(f"{name} is empty")
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class RunningTrace:
    """Running point estimates: estimate after b draws, for b = 1..B."""

    estimator_name: str
    indices: np.ndarray
    values: np.ndarray
    n_zero_likelihood: int = 0
    flagged: bool = False

    @property
    def estimates(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.values.tolist()))

    @property
    def final(self) -> float:
        return float(self.values[-1])


@dataclass(frozen=True)
class MetropolisResult:
    draws: np.ndarray
    acceptance_rate: float
    steps: int
    burned: int
    thin: int


@dataclass(frozen=True)
class TargetEstimate:
    name: str
    estimate: float
    mc_se: float
    ess: float
    flagged: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "mc_se": self.mc_se,
            "ess": self.ess,
            "flagged": self.flagged,
            "error": self.error,
        }


@dataclass(frozen=True)
class CompatReport:
    """Named scalar estimates with their estimator metadata."""

    method: str
    draws: int
    prior_draw_count: int
    seed: int
    targets: dict[str, TargetEstimate] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "draws": self.draws,
            "prior_draw_count": self.prior_draw_count,
            "seed": self.seed,
            "targets": {k: v.to_dict() for k, v in self.targets.items()},
        }


def sample_direct_beta(a: float, b: float, count: int, seed: int) -> np.ndarray:
    """i.i.d. Beta(a, b) draws, deterministic for a given seed."""
    if not (a > 0 and b > 0):
        raise DomainError(f"Beta draws need a, b > 0, got ({a}, {b})")
    if count < 1:
        raise DomainError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    return rng.beta(a, b, size=count)


def rw_metropolis(
    log_target: Callable,
    init,
    steps: int,
    step_scale,
    seed: int,
    burn_in: float = 0.1,
    thin: int = 1,
) -> MetropolisResult:
    """Gaussian-proposal random-walk chain targeting exp(log_target).

    ``log_target`` is vectorized over ``(m, d)`` points. Burn-in is a
    fraction of ``steps``; thinning keeps every ``thin``-th state after it.
    """
    x = np.atleast_1d(np.asarray(init, dtype=float))
    d = x.shape[0]
    scale = np.broadcast_to(np.asarray(step_scale, dtype=float), (d,)).copy()
    lp = float(log_target(x[None, :])[0])
    if not math.isfinite(lp):
        raise EstimatorInputError(
            f"log target is not finite at the initial point (got {lp})"
        )
    if steps < 1 or thin < 1 or not 0 <= burn_in < 1:
        raise DomainError("need steps >= 1, thin >= 1, 0 <= burn_in < 1")
    rng = np.random.default_rng(seed)
    n_burn = int(round(burn_in * steps))
    kept = []
    accepted = 0
    for step in range(steps):
        prop = x + scale * rng.standard_normal(d)
        lp_prop = float(log_target(prop[None, :])[0])
        if math.log(rng.random()) < lp_prop - lp:
            x, lp = prop, lp_prop
            accepted += 1
        if step >= n_burn and (step - n_burn) % thin == 0:
            kept.append(x.copy())
    return MetropolisResult(
        np.asarray(kept), accepted / steps, steps, n_burn, thin
    )


def beta_bernoulli_batch(
    a: float,
    b: float,
    n: int,
    n1: int,
    draws: int,
    seed: int,
    method: str = "direct",
    prior2: tuple[float, float] | None = None,
) -> SampleBatch:
    """SampleBatch for the Beta-Bernoulli model: posterior draws from
    Beta(n1+a, n-n1+b), an independent prior stream, and the log evaluators.

    The prior stream is drawn alongside the posterior one from a child seed
    of the same seed sequence, so one seed fixes the whole batch.
    """
    children = np.random.SeedSequence(seed).spawn(3)
    a_star, b_star = n1 + a, n - n1 + b
    if method == "direct":
        post = np.random.default_rng(children[0]).beta(a_star, b_star, size=draws)
    elif method == "rw_metropolis":

        def log_post_kernel(pts):
            th = pts[:, 0]
            return log_beta_pdf(th, a, b) + log_bernoulli_lik(th, n, n1)

        res = rw_metropolis(
            log_post_kernel,
            np.array([a_star / (a_star + b_star)]),
            int(draws / 0.9) + 1,
            0.25,
            int(children[0].generate_state(1)[0] % (2**31)),
            burn_in=0.1,
        )
        post = res.draws[:draws, 0]
    else:
        raise DomainError(f"unknown sampling method {method!r}")
    prior = np.random.default_rng(children[1]).beta(a, b, size=draws)

    prior2_draws = None
    log_prior2 = None
    if prior2 is not None:
        a2, b2 = prior2
        prior2_draws = np.random.default_rng(children[2]).beta(a2, b2, size=draws)[
            :, None
        ]
        log_prior2 = lambda pts: log_beta_pdf(pts[:, 0], a2, b2)

    return SampleBatch(
        posterior_draws=post[:, None],
        prior_draws=prior[:, None],
        log_prior=lambda pts: log_beta_pdf(pts[:, 0], a, b),
        log_lik=lambda pts: log_bernoulli_lik(pts[:, 0], n, n1),
        seed=seed,
        method=method,
        prior2_draws=prior2_draws,
        log_prior2=log_prior2,
    )


def _log_mean_exp(x: np.ndarray) -> float:
    return float(np.logaddexp.reduce(x) - math.log(x.shape[0]))


def _prefix_log_mean_exp(x: np.ndarray) -> np.ndarray:
    return np.logaddexp.accumulate(x) - np.log(np.arange(1, x.shape[0] + 1))


def _require(batch: SampleBatch, **streams):
    for name, needed in streams.items():
        if needed and getattr(batch, name) is None:
            raise EstimatorInputError(f"operation requires {name}")


def kappa_pp_harmonic(batch: SampleBatch) -> RunningTrace:
    """Running prior-posterior compatibility from posterior draws only.

    The prior/likelihood ratio term makes this a harmonic-mean-style
    estimator: consistent but heavy-tailed. Draws where the likelihood
    vanishes are excluded from the ratio term, counted, and the trace is
    flagged.
    """
    _require(batch, posterior_draws=True, log_prior=True, log_lik=True)
    post = batch.posterior_draws
    log_pi = np.asarray(batch.log_prior(post), dtype=float)
    log_lik = np.asarray(batch.log_lik(post), dtype=float)

    log_ratio = log_pi - log_lik
    bad = ~np.isfinite(log_ratio)
    n_zero = int(bad.sum())
    ratio_for_prefix = np.where(bad, -np.inf, log_ratio)

    b_idx = np.arange(1, post.shape[0] + 1)
    lme_pi = _prefix_log_mean_exp(log_pi)
    lme_likpi = _prefix_log_mean_exp(log_lik + log_pi)
    included = np.cumsum(~bad)
    with np.errstate(divide="ignore", invalid="ignore"):
        lme_ratio = np.logaddexp.accumulate(ratio_for_prefix) - np.log(included)
        values = np.exp(lme_pi - 0.5 * (lme_ratio + lme_likpi))
    values = np.where(included == 0, np.nan, values)
    return RunningTrace("harmonic", b_idx, values, n_zero, flagged=n_zero > 0)


def kappa_pp_stable(batch: SampleBatch) -> RunningTrace:
    """Running prior-posterior compatibility using prior draws for the
    prior expectations; converges quickly where the harmonic form does
    not."""
    _require(batch, posterior_draws=True, prior_draws=True, log_prior=True, log_lik=True)
    m = min(batch.posterior_draws.shape[0], batch.prior_draws.shape[0])
    post = batch.posterior_draws[:m]
    prior = batch.prior_draws[:m]

    log_pi_post = np.asarray(batch.log_prior(post), dtype=float)
    log_lik_post = np.asarray(batch.log_lik(post), dtype=float)
    log_pi_prior = np.asarray(batch.log_prior(prior), dtype=float)
    log_lik_prior = np.asarray(batch.log_lik(prior), dtype=float)

    b_idx = np.arange(1, m + 1)
    lme_pi = _prefix_log_mean_exp(log_pi_post)
    lme_likpi = _prefix_log_mean_exp(log_lik_post + log_pi_post)
    # ratio of prior sums: the 1/b factors cancel
    lse_pi_prior = np.logaddexp.accumulate(log_pi_prior)
    lse_lik_prior = np.logaddexp.accumulate(log_lik_prior)
    values = np.exp(lme_pi - 0.5 * (lse_pi_prior - lse_lik_prior + lme_likpi))
    return RunningTrace("stable", b_idx, values)


class _Streams:
    """Lazy log-value streams shared by the suite's targets."""

    def __init__(self, batch: SampleBatch):
        self.batch = batch
        self._cache: dict[str, np.ndarray] = {}

    def get(self, key: str) -> np.ndarray:
        if key in self._cache:
            return self._cache[key]
        b = self.batch
        if key == "pi_post":
            val = np.asarray(b.log_prior(b.posterior_draws), dtype=float)
        elif key == "lik_post":
            val = np.asarray(b.log_lik(b.posterior_draws), dtype=float)
        elif key == "pi_prior":
            val = np.asarray(b.log_prior(b.prior_draws), dtype=float)
        elif key == "lik_prior":
            val = np.asarray(b.log_lik(b.prior_draws), dtype=float)
        elif key == "pi2_on_prior":
            val = np.asarray(b.log_prior2(b.prior_draws), dtype=float)
        elif key == "pi2_on_prior2":
            val = np.asarray(b.log_prior2(b.prior2_draws), dtype=float)
        else:
            raise KeyError(key)
        self._cache[key] = val
        return val


# target -> (required batch fields, needs pi > 0 at posterior draws,
#            [(coefficient, stream spec)...]) where the log estimate is
# sum of coefficient * log-mean-exp(stream); stream spec is a tuple of
# (+1/-1, stream key) added together pointwise.
_TARGET_DEFS: dict[str, tuple[tuple[str, ...], bool, list]] = {
    "norm_p": (
        ("posterior_draws", "prior_draws", "log_prior", "log_lik"),
        False,
        [(0.5, (("+", "lik_post"), ("+", "pi_post"))), (-0.5, (("+", "lik_prior"),))],
    ),
    "norm_pi": (
        ("prior_draws", "log_prior"),
        False,
        [(0.5, (("+", "pi_prior"),))],
    ),
    "norm_lik_local": (
        ("posterior_draws", "prior_draws", "log_prior", "log_lik"),
        True,
        [(0.5, (("+", "lik_prior"),)), (0.5, (("+", "lik_post"), ("-", "pi_post")))],
    ),
    "kappa_pi_lik_local": (
        ("posterior_draws", "prior_draws", "log_prior", "log_lik"),
        True,
        [
            (1.0, (("+", "lik_prior"),)),
            (-0.5, (("+", "pi_prior"),)),
            (-0.5, (("+", "lik_prior"),)),
            (-0.5, (("+", "lik_post"), ("-", "pi_post"))),
        ],
    ),
    "kappa_pi_p": (
        ("posterior_draws", "prior_draws", "log_prior", "log_lik"),
        False,
        [
            (1.0, (("+", "pi_post"),)),
            (-0.5, (("+", "pi_prior"),)),
            (0.5, (("+", "lik_prior"),)),
            (-0.5, (("+", "lik_post"), ("+", "pi_post"))),
        ],
    ),
    "kappa_pi1_pi2": (
        ("prior_draws", "prior2_draws", "log_prior", "log_prior2"),
        False,
        [
            (1.0, (("+", "pi2_on_prior"),)),
            (-0.5, (("+", "pi_prior"),)),
            (-0.5, (("+", "pi2_on_prior2"),)),
        ],
    ),
    "kappa_lik_p_local": (
        ("posterior_draws", "log_prior", "log_lik"),
        True,
        [
            (1.0, (("+", "lik_post"),)),
            (-0.5, (("+", "lik_post"), ("-", "pi_post"))),
            (-0.5, (("+", "lik_post"), ("+", "pi_post"))),
        ],
    ),
}


def _combine(streams: _Streams, spec) -> np.ndarray:
    total = None
    for sign, key in spec:
        arr = streams.get(key)
        arr = arr if sign == "+" else -arr
        total = arr if total is None else total + arr
    return total


def _ess(log_values: np.ndarray) -> float:
    """Effective sample size of a positive-valued expectation stream via
    batch means (scale-invariant, computed on max-shifted values)."""
    n = log_values.shape[0]
    if n < 2 * _N_BATCHES:
        return float(n)
    x = np.exp(log_values - np.max(log_values[np.isfinite(log_values)], initial=0.0))
    bsize = n // _N_BATCHES
    x = x[: bsize * _N_BATCHES]
    means = x.reshape(_N_BATCHES, bsize).mean(axis=1)
    var_x = float(np.var(x, ddof=1))
    var_lr = bsize * float(np.var(means, ddof=1))
    if var_lr <= 0 or var_x <= 0:
        return float(n)
    return min(float(n), n * var_x / var_lr)


def _target_estimate(name: str, streams: _Streams) -> TargetEstimate:
    _, needs_support, terms = _TARGET_DEFS[name]
    if needs_support:
        pi_post = streams.get("pi_post")
        if not np.isfinite(pi_post).all():
            raise EstimatorInputError(
                "posterior draws fall outside the prior's support; the "
                f"ratio form of {name} is undefined"
            )

    log_est = 0.0
    combos = []
    for coef, spec in terms:
        combo = _combine(streams, spec)
        combos.append((coef, combo))
        log_est += coef * _log_mean_exp(combo)
    estimate = math.exp(log_est)

    # batch-means SE: recompute the estimator on each of 40 aligned batches
    n_min = min(c.shape[0] for _, c in combos)
    bsize = n_min // _N_BATCHES
    mc_se = math.nan
    if bsize >= 1:
        batch_logs = np.zeros(_N_BATCHES)
        for coef, combo in combos:
            trimmed = combo[: bsize * _N_BATCHES].reshape(_N_BATCHES, bsize)
            lme = np.logaddexp.reduce(trimmed, axis=1) - math.log(bsize)
            batch_logs += coef * lme
        batch_est = np.exp(batch_logs)
        if np.isfinite(batch_est).all():
            mc_se = float(np.std(batch_est, ddof=1) / math.sqrt(_N_BATCHES))

    ess = min((_ess(c) for _, c in combos), default=float("nan"))
    flagged = ess < _ESS_WARN
    if flagged:
        warnings.warn(
            f"effective sample size {ess:.0f} below {_ESS_WARN:.0f} for "
            f"target {name}",
            stacklevel=3,
        )
    return TargetEstimate(name, estimate, mc_se, ess, flagged)


def postmean_suite(batch: SampleBatch, targets=None) -> CompatReport:
    """Point estimates with batch-means standard errors for the requested
    geometric quantities; failures are isolated per target."""
    names = tuple(targets) if targets is not None else SUITE_TARGETS
    for name in names:
        if name not in _TARGET_DEFS:
            raise DomainError(f"unknown target {name!r}; known: {SUITE_TARGETS}")
    streams = _Streams(batch)
    results: dict[str, TargetEstimate] = {}
    for name in names:
        required, _, _ = _TARGET_DEFS[name]
        try:
            for fieldname in required:
                if getattr(batch, fieldname) is None:
                    raise EstimatorInputError(f"target {name} requires {fieldname}")
            results[name] = _target_estimate(name, streams)
        except (EstimatorInputError, DomainError) as exc:
            results[name] = TargetEstimate(
                name, math.nan, math.nan, math.nan, True, str(exc)
            )
    return CompatReport(
        method=batch.method,
        draws=0 if batch.posterior_draws is None else batch.posterior_draws.shape[0],
        prior_draw_count=0 if batch.prior_draws is None else batch.prior_draws.shape[0],
        seed=batch.seed,
        targets=results,
    )


def kappa_pi1_pi2_mc(
    draws_pi1: np.ndarray,
    draws_pi2: np.ndarray,
    log_pi1: Callable,
    log_pi2: Callable,
) -> float:
    """Prior-prior compatibility from draws of both priors."""
    draws_pi1 = np.atleast_2d(np.asarray(draws_pi1, dtype=float))
    draws_pi2 = np.atleast_2d(np.asarray(draws_pi2, dtype=float))
    if draws_pi1.shape[0] < 1 or draws_pi2.shape[0] < 1:
        raise EstimatorInputError("both draw sets must be non-empty")
    lme_cross = _log_mean_exp(np.asarray(log_pi2(draws_pi1), dtype=float))
    lme_self1 = _log_mean_exp(np.asarray(log_pi1(draws_pi1), dtype=float))
    lme_self2 = _log_mean_exp(np.asarray(log_pi2(draws_pi2), dtype=float))
    return math.exp(lme_cross - 0.5 * (lme_self1 + lme_self2))


def save_draws_csv(path, draws: np.ndarray, names: list[str] | None = None) -> None:
    """One row per draw, one column per parameter component, LF endings."""
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if names is None:
        names = [f"theta{i}" for i in range(draws.shape[1])]
    if len(names) != draws.shape[1]:
        raise DomainError("one column name per parameter component required")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in draws:
            writer.writerow([format(v, ".17g") for v in row])


def load_draws_csv(path) -> tuple[np.ndarray, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    if not rows:
        raise EstimatorInputError(f"no draws in {path}")
    return np.asarray(rows), names
