import math

import numpy as np
import pytest

from bayesgeom.densities import log_laplace_pdf, log_normal_pdf
from bayesgeom.errors import DomainError
from bayesgeom.estimators import postmean_suite
from bayesgeom.geometry import ScalarField, compatibility, local_compatibility
from bayesgeom.numerics import QuadSpec, SupportRegion
from bayesgeom.regression import (
    CURVE_METRICS,
    RegressionData,
    ShrinkageConfig,
    kappa_curves,
    load_prostate,
    log_likelihood,
    log_posterior,
    log_prior,
    make_batch,
    posterior_chain,
    prepare,
    prior_norm_shrinkage,
    prior_prior_curve,
    sample_prior,
    synthetic_regression,
)


@pytest.fixture(scope="module")
def fixture_data():
    y, X = synthetic_regression(97, 8, seed=0)
    return prepare(y, X)


class TestPrepare:
    def test_standardization(self, fixture_data):
        assert abs(fixture_data.y.mean()) < 1e-10
        assert np.abs(fixture_data.X.mean(axis=0)).max() < 1e-10
        assert np.abs(fixture_data.X.std(axis=0) - 1).max() < 1e-10

    def test_already_standardized_unchanged(self, fixture_data):
        again = prepare(fixture_data.y, fixture_data.X)
        assert np.allclose(again.X, fixture_data.X, atol=1e-12)
        assert np.allclose(again.y, fixture_data.y, atol=1e-12)

    def test_centering_simple(self):
        data = prepare(np.array([1.0, 2.0, 3.0]), np.array([[1.0], [2.0], [4.0]]))
        assert data.y == pytest.approx([-1.0, 0.0, 1.0])

    def test_constant_column_rejected(self):
        with pytest.raises(DomainError):
            prepare(np.arange(5.0), np.ones((5, 1)))

    def test_degenerate_shape_rejected(self):
        with pytest.raises(DomainError):
            prepare(np.arange(3.0), np.random.default_rng(0).normal(size=(3, 4)))


class TestLogPosterior:
    def test_sigma_outside_support(self, fixture_data):
        cfg = ShrinkageConfig("gaussian", 1.0)
        beta = np.zeros((1, 8))
        assert log_posterior(fixture_data, cfg, beta, np.array([2.5]))[0] == -math.inf
        assert log_posterior(fixture_data, cfg, beta, np.array([-0.1]))[0] == -math.inf

    def test_zero_beta_reduction(self, fixture_data):
        cfg = ShrinkageConfig("gaussian", 1.0)
        sigma = np.array([0.9])
        beta = np.zeros((1, 8))
        got = log_posterior(fixture_data, cfg, beta, sigma)[0]
        n = fixture_data.n
        expected = (
            -0.5 * n * math.log(2 * math.pi * 0.81)
            - 0.5 * float(fixture_data.y @ fixture_data.y) / 0.81
            + float(log_prior(cfg, beta, sigma)[0])
        )
        assert got == pytest.approx(expected, rel=1e-12)

    def test_prior_normalizer_gap_between_kinds(self):
        # at beta = 0 and matched variance the log densities differ by the
        # known normalizer gap p * log(sqrt(4 pi lam^2)/ (2 b))
        p, lam = 8, 0.7
        gauss = ShrinkageConfig("gaussian", lam)
        lap = ShrinkageConfig("laplace", lam)
        beta = np.zeros((1, p))
        sigma = np.array([1.0])
        gap = float(log_prior(lap, beta, sigma)[0] - log_prior(gauss, beta, sigma)[0])
        b = math.sqrt(0.5 * lam)
        expected = p * (
            -math.log(2 * b) + 0.5 * math.log(2 * math.pi * lam)
        )
        assert gap == pytest.approx(expected, rel=1e-12)


class TestPriorNorms:
    def test_closed_forms_p1(self):
        gauss = prior_norm_shrinkage(ShrinkageConfig("gaussian", 1.0), 1)
        lap = prior_norm_shrinkage(ShrinkageConfig("laplace", 1.0), 1)
        assert gauss == pytest.approx((4 * math.pi) ** -0.25, rel=1e-12)
        assert lap == pytest.approx((4 * math.sqrt(0.5)) ** -0.5, rel=1e-12)
        assert lap > gauss

    def test_laplace_more_peaked_p8_small_lambda(self):
        for lam in (1e-4, 1e-2, 1.0):
            gauss = prior_norm_shrinkage(ShrinkageConfig("gaussian", lam), 8)
            lap = prior_norm_shrinkage(ShrinkageConfig("laplace", lam), 8)
            assert lap > gauss

    def test_large_lambda_limit(self):
        # both norms vanish and their ratio is constant in lambda
        ratios = []
        for lam in (10.0, 100.0, 1000.0):
            g = prior_norm_shrinkage(ShrinkageConfig("gaussian", lam), 4)
            l = prior_norm_shrinkage(ShrinkageConfig("laplace", lam), 4)
            assert g < 1e-2 and l < 1e-2
            ratios.append(l / g)
        assert ratios[0] == pytest.approx(ratios[-1], rel=1e-9)

    def test_matches_quadrature_p1(self):
        from bayesgeom.geometry import norm as l2_norm
        from bayesgeom.numerics import SupportRegion

        lam = 0.8
        for kind in ("gaussian", "laplace"):
            cfg = ShrinkageConfig(kind, lam)

            def beta_block_log(pts, _cfg=cfg):
                if _cfg.prior_kind == "gaussian":
                    return log_normal_pdf(pts[:, 0], 0.0, _cfg.lambda_sq)
                return log_laplace_pdf(pts[:, 0], 0.0, _cfg.laplace_scale)

            field = ScalarField(
                beta_block_log,
                SupportRegion.interval(-math.inf, math.inf),
                "prior",
                check_l2=False,
            )
            assert prior_norm_shrinkage(cfg, 1) == pytest.approx(
                l2_norm(field), rel=1e-9
            )


class TestChain:
    def test_posterior_mean_matches_ridge_solution(self, fixture_data):
        cfg = ShrinkageConfig("gaussian", 1.0)
        draws, info = posterior_chain(fixture_data, cfg, 6000, seed=11)
        sigma_hat = draws[:, 8].mean()
        ridge = np.linalg.solve(
            fixture_data.X.T @ fixture_data.X
            + sigma_hat**2 / cfg.lambda_sq * np.eye(8),
            fixture_data.X.T @ fixture_data.y,
        )
        assert np.abs(draws[:, :8].mean(axis=0) - ridge).max() <= 0.06
        assert 0.1 <= info["acceptance_beta"] <= 0.6

    def test_prior_sampler_moments(self):
        cfg = ShrinkageConfig("laplace", 2.0)
        draws = sample_prior(cfg, 4, 40000, seed=3)
        assert draws.shape == (40000, 5)
        assert np.abs(draws[:, :4].mean(axis=0)).max() <= 0.05
        assert np.abs(draws[:, :4].var(axis=0) - 2.0).max() <= 0.1
        assert draws[:, 4].min() > 0 and draws[:, 4].max() < 2


class TestCurves:
    def test_kappa_curves_rows_and_ranges(self, fixture_data):
        rows = kappa_curves(fixture_data, [0.01, 1.0], draws=4000, seed=0)
        metrics = {r["metric"] for r in rows}
        assert set(CURVE_METRICS) <= metrics
        for r in rows:
            if r["metric"].startswith("kappa"):
                assert -0.02 <= r["estimate"] <= 1.02

    def test_reproducibility(self, fixture_data):
        a = kappa_curves(fixture_data, [0.5], draws=3000, seed=5)
        b = kappa_curves(fixture_data, [0.5], draws=3000, seed=5)
        assert a == b

    def test_empty_grid_rejected(self, fixture_data):
        with pytest.raises(DomainError):
            kappa_curves(fixture_data, [], draws=100, seed=0)

    def test_prior_prior_center2_is_negligible_below_two(self):
        rows = prior_prior_curve(
            [0.01, 0.1, 1.0, 10.0], centers=(2.0,), p=8, draws=20000, seed=0
        )
        for r in rows:
            if r["lambda_sq"] < 2.0:
                assert r["estimate"] <= 0.02
        assert rows[-1]["estimate"] > 0.1

    def test_prior_prior_zero_center_flat(self):
        rows = prior_prior_curve(
            [1e-4, 1e-2, 1.0, 10.0], centers=(0.0,), p=8, draws=30000, seed=1
        )
        ests = [r["estimate"] for r in rows]
        ses = [r["mc_se"] for r in rows]
        spread = max(ests) - min(ests)
        pooled = math.sqrt(
            ses[int(np.argmax(ests))] ** 2 + ses[int(np.argmin(ests))] ** 2
        )
        assert spread <= 3 * pooled


class TestP1QuadratureSanity:
    def test_kappa_curves_match_2d_quadrature(self):
        # one covariate: theta = (beta, sigma) is 2-D, so the oracle applies
        y, X = synthetic_regression(60, 1, seed=4)
        data = prepare(y, X)
        cfg = ShrinkageConfig("gaussian", 0.5)
        region = SupportRegion((-math.inf, 0.0), (math.inf, 2.0))

        def prior_log(pts):
            return log_prior(cfg, pts[:, :1], pts[:, 1])

        def lik_log(pts):
            return log_likelihood(data, pts[:, :1], pts[:, 1])

        pi = ScalarField(prior_log, region, "prior", check_l2=False)
        ell = ScalarField(lik_log, region, "likelihood", check_l2=False)
        post_kernel = ScalarField(
            lambda pts: prior_log(pts) + lik_log(pts),
            region,
            "posterior",
            check_l2=False,
        )
        spec = QuadSpec(rel_tol=1e-8, max_subdivisions=4000)
        kappa_pi_lik = local_compatibility(pi, ell, spec)
        kappa_pi_p = compatibility(pi, post_kernel, spec).kappa
        kappa_lik_p = compatibility(ell, post_kernel, spec).kappa

        batch = make_batch(data, cfg, 40000, seed=12)
        report = postmean_suite(batch, CURVE_METRICS)
        for name, truth in (
            ("kappa_pi_lik_local", kappa_pi_lik),
            ("kappa_pi_p", kappa_pi_p),
            ("kappa_lik_p_local", kappa_lik_p),
        ):
            est = report.targets[name]
            assert abs(est.estimate - truth) <= 3 * est.mc_se + 1e-4, name


class TestSyntheticAndLoader:
    def test_synthetic_shapes_and_determinism(self):
        y1, X1 = synthetic_regression(97, 8, seed=0)
        y2, X2 = synthetic_regression(97, 8, seed=0)
        assert y1.shape == (97,) and X1.shape == (97, 8)
        assert np.array_equal(y1, y2) and np.array_equal(X1, X2)
        y3, _ = synthetic_regression(97, 8, seed=1)
        assert not np.array_equal(y1, y3)

    def test_prostate_loader(self, tmp_path):
        header = "lcavol lweight age lbph svi lcp gleason pgg45 lpsa train"
        rows = [
            "1 -0.58 2.77 50 -1.39 0 -1.39 6 0 -0.43 T",
            "2 -0.99 3.32 58 -1.39 0 -1.39 6 0 -0.16 T",
            "3 -0.51 2.69 74 -1.39 0 -1.39 7 20 -0.16 F",
        ]
        path = tmp_path / "prostate.data"
        path.write_text(header + "\n" + "\n".join(rows) + "\n")
        y, X = load_prostate(path)
        assert X.shape == (3, 8)
        assert y == pytest.approx([-0.43, -0.16, -0.16])
        assert X[0, 0] == pytest.approx(-0.58)
        assert X[2, 7] == pytest.approx(20.0)

    def test_prostate_loader_missing_column(self, tmp_path):
        path = tmp_path / "bad.data"
        path.write_text("lcavol lweight lpsa\n1 2 3\n")
        with pytest.raises(DomainError):
            load_prostate(path)


class TestShrinkageConfig:
    def test_variance_matching(self):
        cfg = ShrinkageConfig("laplace", 3.0)
        assert 2 * cfg.laplace_scale**2 == pytest.approx(3.0, rel=1e-12)

    def test_validation(self):
        with pytest.raises(DomainError):
            ShrinkageConfig("horseshoe", 1.0)
        with pytest.raises(DomainError):
            ShrinkageConfig("gaussian", 0.0)
