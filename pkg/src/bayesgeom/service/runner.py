"""Execute validated run configurations; shared by the HTTP routes and the
CLI."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .. import conjugate, expfam, regression
from ..errors import (
    DomainError,
    EstimatorInputError,
    ImproperMemberError,
    NanInIntegrandError,
    NotSquareIntegrableError,
    QuadratureNonConvergedError,
    ZeroNormError,
)
from ..estimators import (
    beta_bernoulli_batch,
    kappa_pp_harmonic,
    kappa_pp_stable,
    postmean_suite,
)
from . import schemas

__all__ = ["RunResult", "execute", "rows_to_csv", "NUMERIC_ERRORS"]

# failures of the mathematics rather than of the configuration
NUMERIC_ERRORS = (
    ImproperMemberError,
    QuadratureNonConvergedError,
    NanInIntegrandError,
    NotSquareIntegrableError,
    ZeroNormError,
    EstimatorInputError,
)


@dataclass(frozen=True)
class RunResult:
    command: str
    report: dict | None = None
    table: list[dict] | None = None
    table_columns: list[str] | None = None


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    """CSV text with 17-significant-digit floats and LF line endings."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row.get(col)) for col in columns))
    return "\n".join(lines) + "\n"


def _run_beta_binomial(cfg: schemas.BetaBinomialConfig) -> RunResult:
    m = cfg.model
    model = conjugate.BetaBernoulliModel(m.a, m.b, m.n, m.n1)
    a_max, b_max = conjugate.bb_max_compatible(m.n, m.n1)
    kappa_pl = conjugate.bb_kappa_prior_lik(model)
    report = {
        "model": {"a": m.a, "b": m.b, "n": m.n, "n1": m.n1},
        "norm_prior": conjugate.bb_prior_norm(model),
        "norm_posterior": conjugate.bb_posterior_norm(model),
        "norm_likelihood": conjugate.bb_likelihood_norm(model),
        "kappa_prior_lik": kappa_pl,
        "kappa_prior_post": conjugate.bb_kappa_prior_post(model),
        "angle_prior_lik_deg": math.degrees(math.acos(min(1.0, kappa_pl))),
        "max_compatible": {"a": a_max, "b": b_max},
    }
    return RunResult("beta-binomial", report=report)


def _run_nig(cfg: schemas.NigConfig) -> RunResult:
    prior = conjugate.NIGParams(
        cfg.prior.mu0, cfg.prior.eta0, cfg.prior.nu0, cfg.prior.sigma0_sq
    )
    report: dict = {
        "prior": asdict(prior),
        "norm_prior": conjugate.nig_norm(prior),
    }
    if cfg.data is not None:
        d = cfg.data
        post = conjugate.nig_posterior(prior, d.n, d.ybar, d.ss)
        report["posterior"] = asdict(post)
        report["norm_posterior"] = conjugate.nig_norm(post)
        report["kappa_prior_post"] = conjugate.nig_kappa(prior, post)
        if d.n > 3 and d.ss > 0:
            lik = conjugate.nig_likelihood_as_nig(d.n, d.ybar, d.ss)
            report["kappa_prior_lik"] = conjugate.nig_kappa(prior, lik)
            report["kappa_post_lik"] = conjugate.nig_kappa(post, lik)
        else:
            report["kappa_prior_lik"] = None
            report["note"] = (
                "the likelihood is square-integrable as an NIG member only "
                "for n > 3 and ss > 0; prior-likelihood compatibility skipped"
            )
    return RunResult("nig", report=report)


def _run_expfam(cfg: schemas.ExpfamConfig) -> RunResult:
    family = expfam.get_family(cfg.family, cfg.family_params)
    hyper = family.hyper(cfg.tau, cfg.n0)
    report: dict = {
        "family": cfg.family,
        "tau": list(hyper.tau),
        "n0": hyper.n0,
        "log_K": expfam.log_K(family, hyper),
        "n": len(cfg.data),
    }
    for which in ("prior_lik", "prior_post", "post_lik"):
        report[f"kappa_{which}"] = expfam.ef_kappa(family, hyper, cfg.data, which)
        report[f"affine_kappa_{which}"] = expfam.ef_affine_kappa(
            family, hyper, cfg.data, which
        )
    max_hyper = expfam.ef_max_compatible(family, cfg.data)
    report["max_compatible"] = {"tau": list(max_hyper.tau), "n0": max_hyper.n0}
    report["kappa_prior_lik_at_max"] = expfam.ef_kappa(
        family, max_hyper, cfg.data, "prior_lik"
    )
    return RunResult("expfam", report=report)


def _run_estimate(cfg: schemas.EstimateConfig) -> RunResult:
    m = cfg.model
    prior2 = None if cfg.prior2 is None else (cfg.prior2.a, cfg.prior2.b)
    batch = beta_bernoulli_batch(
        m.a,
        m.b,
        m.n,
        m.n1,
        cfg.mcmc.draws,
        cfg.mcmc.seed,
        method=cfg.mcmc.method,
        prior2=prior2,
    )
    suite = postmean_suite(batch, cfg.targets)
    model = conjugate.BetaBernoulliModel(m.a, m.b, m.n, m.n1)
    closed = {
        "norm_pi": conjugate.bb_prior_norm(model),
        "norm_p": conjugate.bb_posterior_norm(model),
        "norm_lik_local": conjugate.bb_likelihood_norm(model),
        "kappa_pi_lik_local": conjugate.bb_kappa_prior_lik(model),
        "kappa_pi_p": conjugate.bb_kappa_prior_post(model),
    }
    if prior2 is not None:
        closed["kappa_pi1_pi2"] = conjugate.bb_kappa_prior_prior(
            m.a, m.b, cfg.prior2.a, cfg.prior2.b
        )
    report = suite.to_dict()
    report["model"] = {"a": m.a, "b": m.b, "n": m.n, "n1": m.n1}
    report["closed_form"] = {
        k: v for k, v in closed.items() if k in report["targets"]
    }
    return RunResult("estimate", report=report)


_TRACE_COLUMNS = ["a", "b", "estimator", "draw", "estimate", "reference"]


def _run_trace(cfg: schemas.TraceConfig) -> RunResult:
    rows = []
    n, n1 = cfg.model.n, cfg.model.n1
    for setting in cfg.model.settings:
        model = conjugate.BetaBernoulliModel(setting.a, setting.b, n, n1)
        reference = conjugate.bb_kappa_prior_post(model)
        batch = beta_bernoulli_batch(
            setting.a,
            setting.b,
            n,
            n1,
            cfg.mcmc.draws,
            cfg.mcmc.seed,
            method=cfg.mcmc.method,
        )
        for name in cfg.estimators:
            trace = (
                kappa_pp_harmonic(batch) if name == "harmonic" else kappa_pp_stable(batch)
            )
            keep = np.arange(0, trace.indices.shape[0], cfg.stride)
            if keep[-1] != trace.indices.shape[0] - 1:
                keep = np.append(keep, trace.indices.shape[0] - 1)
            for i in keep:
                rows.append(
                    {
                        "a": setting.a,
                        "b": setting.b,
                        "estimator": name,
                        "draw": int(trace.indices[i]),
                        "estimate": float(trace.values[i]),
                        "reference": reference,
                    }
                )
    return RunResult("trace", table=rows, table_columns=_TRACE_COLUMNS)


def _sweep_cell(args):
    a, b, n, n1, metrics = args
    model = conjugate.BetaBernoulliModel(a, b, n, n1)
    row = {"a": a, "b": b}
    for metric in metrics:
        if metric == "kappa_prior_lik":
            row[metric] = conjugate.bb_kappa_prior_lik(model)
        elif metric == "kappa_prior_post":
            row[metric] = conjugate.bb_kappa_prior_post(model)
        elif metric == "norm_prior":
            row[metric] = conjugate.bb_prior_norm(model)
        elif metric == "norm_posterior":
            row[metric] = conjugate.bb_posterior_norm(model)
    return row


def _run_sweep(cfg: schemas.SweepConfig, threads: int) -> RunResult:
    axes = {axis.parameter: axis.values() for axis in cfg.grid}
    cells = [
        (a, b, cfg.model.n, cfg.model.n1, tuple(cfg.metrics))
        for a in axes["a"]
        for b in axes["b"]
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]
    return RunResult(
        "sweep", table=rows, table_columns=["a", "b", *cfg.metrics]
    )


_REGRESSION_COLUMNS = ["lambda_sq", "prior_kind", "metric", "estimate", "mc_se", "ess"]


def _run_regression(cfg: schemas.RegressionConfig) -> RunResult:
    if cfg.data.path is not None:
        y, X = regression.load_prostate(cfg.data.path)
    else:
        s = cfg.data.synthetic
        y, X = regression.synthetic_regression(s.n, s.p, s.seed)
    data = regression.prepare(y, X)
    grid = cfg.lambda_values()
    rows = regression.kappa_curves(
        data,
        grid,
        prior_kinds=tuple(cfg.kinds),
        draws=cfg.mcmc.draws,
        seed=cfg.mcmc.seed,
    )
    if cfg.centers:
        pp_rows = regression.prior_prior_curve(
            grid,
            centers=tuple(cfg.centers),
            p=data.p,
            draws=cfg.mcmc.draws,
            seed=cfg.mcmc.seed,
        )
        for row in pp_rows:
            center = row.pop("center")
            row["metric"] = f"kappa_pi1_pi2_center_{center:g}"
            row["prior_kind"] = "gaussian_vs_laplace"
            rows.append(row)
    out_rows = [{col: row.get(col) for col in _REGRESSION_COLUMNS} for row in rows]
    return RunResult("regression", table=out_rows, table_columns=_REGRESSION_COLUMNS)


def execute(config, threads: int = 1) -> RunResult:
    """Run one validated configuration and return its artifacts."""
    if threads < 1:
        raise DomainError(f"threads must be >= 1, got {threads}")
    if isinstance(config, schemas.BetaBinomialConfig):
        return _run_beta_binomial(config)
    if isinstance(config, schemas.NigConfig):
        return _run_nig(config)
    if isinstance(config, schemas.ExpfamConfig):
        return _run_expfam(config)
    if isinstance(config, schemas.EstimateConfig):
        return _run_estimate(config)
    if isinstance(config, schemas.TraceConfig):
        return _run_trace(config)
    if isinstance(config, schemas.SweepConfig):
        return _run_sweep(config, threads)
    if isinstance(config, schemas.RegressionConfig):
        return _run_regression(config)
    raise DomainError(f"unsupported config type {type(config).__name__}")
