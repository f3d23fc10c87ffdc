import math

import numpy as np
import pytest

from bayesgeom.densities import canonical_beta_field
from bayesgeom.errors import DomainError, ImproperMemberError
from bayesgeom.expfam import (
    ConjugateHyper,
    ExpFamSpec,
    bernoulli_canonical,
    ef_affine_kappa,
    ef_kappa,
    ef_max_compatible,
    get_family,
    log_K,
    sum_stats,
)
from bayesgeom.geometry import ScalarField, affine_compatibility, compatibility
from bayesgeom.numerics import (
    QuadSpec,
    SupportRegion,
    integrate,
    log_beta,
)

BERN = bernoulli_canonical()
DATA_DRUG = [0, 1, 0, 0, 0, 0, 1, 0, 0, 0]  # n = 10, n1 = 2


def gaussian_log_K(tau: float, n0: float, sigma_sq: float) -> float:
    # K(tau, n0)^-1 = int exp(tau t - n0 t^2 / (2 s2)) dt, a Gaussian integral
    if n0 <= 0:
        raise ValueError("improper")
    return -(
        0.5 * math.log(2 * math.pi * sigma_sq / n0) + tau * tau * sigma_sq / (2 * n0)
    )


class TestLogK:
    def test_bernoulli_matches_log_beta(self):
        # member (tau, n0) = (a, a+b) has normalizer 1/B(a, b)
        for a, b in [(1.0, 1.0), (2.0, 3.0), (0.7, 5.3), (3.44, 22.99)]:
            h = ConjugateHyper((a,), a + b)
            assert log_K(BERN, h) == pytest.approx(-log_beta(a, b), rel=1e-9, abs=1e-9)

    def test_normal_known_variance_closed_form(self):
        fam = get_family("normal-known-variance", {"sigma_sq": 1.7})
        for tau, n0 in [(0.0, 1.0), (2.5, 3.0), (-1.2, 0.5)]:
            h = ConjugateHyper((tau,), n0)
            assert log_K(fam, h) == pytest.approx(
                gaussian_log_K(tau, n0, 1.7), rel=1e-9, abs=1e-9
            )

    def test_flat_member_on_bounded_support(self):
        bounded = ExpFamSpec(
            name="bounded-toy",
            log_h=lambda y: 0.0,
            suff_stat=lambda y: np.array([float(y)]),
            log_cumulant=lambda eta: np.logaddexp(
                0.0, eta[..., 0] if eta.ndim > 1 else eta
            ),
            eta_of_theta=lambda pts: pts,
            theta_support=SupportRegion.interval(0.0, 2.0),
        )
        h = ConjugateHyper((0.0,), 0.0)
        assert log_K(bounded, h) == pytest.approx(-math.log(2.0), abs=1e-10)

    def test_improper_member_raises(self):
        with pytest.raises(ImproperMemberError):
            log_K(BERN, ConjugateHyper((0.0,), 0.0))
        with pytest.raises(ImproperMemberError):
            log_K(BERN, ConjugateHyper((2.0,), 1.0))

    def test_hyper_factory_probes(self):
        with pytest.raises(ImproperMemberError):
            BERN.hyper([3.0], 2.0)
        h = BERN.hyper([2.0], 5.0)
        assert h.tau == (2.0,) and h.n0 == 5.0


class TestSumStats:
    def test_bernoulli(self):
        st, n = sum_stats(BERN, DATA_DRUG)
        assert n == 10
        assert st == pytest.approx([2.0])

    def test_normal_scaled(self):
        fam = get_family("normal-known-variance", {"sigma_sq": 4.0})
        st, n = sum_stats(fam, [2.0, 6.0])
        assert n == 2
        assert st == pytest.approx([2.0])


class TestEfKappa:
    def test_max_compatible_gives_exactly_one(self):
        h = ef_max_compatible(BERN, DATA_DRUG)
        assert h.tau == (2.0,) and h.n0 == 10.0
        assert ef_kappa(BERN, h, DATA_DRUG, "prior_lik") == pytest.approx(
            1.0, abs=1e-12
        )

    def test_bernoulli_matches_quadrature_oracle(self):
        # direct geometry on canonical-scale densities
        a, b = 2.0, 5.0
        h = ConjugateHyper((a,), a + b)
        prior = canonical_beta_field(a, b)
        n1 = sum(DATA_DRUG)
        n = len(DATA_DRUG)
        post = canonical_beta_field(a + n1, b + n - n1)
        lik = canonical_beta_field(n1, n - n1)  # collinear to the likelihood
        k = ef_kappa(BERN, h, DATA_DRUG, "prior_post")
        assert k == pytest.approx(compatibility(prior, post).kappa, rel=1e-7)
        k2 = ef_kappa(BERN, h, DATA_DRUG, "prior_lik")
        assert k2 == pytest.approx(compatibility(prior, lik).kappa, rel=1e-7)
        k3 = ef_kappa(BERN, h, DATA_DRUG, "post_lik")
        assert k3 == pytest.approx(compatibility(post, lik).kappa, rel=1e-7)

    def test_normal_known_variance_gaussian_identity(self):
        # prior N(tau s2/n0, s2/n0) vs likelihood N(ybar, s2/n): kappa has
        # the two-Gaussian closed form
        s2 = 1.0
        fam = get_family("normal-known-variance", {"sigma_sq": s2})
        data = [1.2]
        tau, n0 = 0.0, 1.0
        h = ConjugateHyper((tau,), n0)
        got = ef_kappa(fam, h, data, "prior_lik")
        m1, v1 = tau * s2 / n0, s2 / n0
        m2, v2 = 1.2, s2 / 1
        closed = math.sqrt(2 * math.sqrt(v1 * v2) / (v1 + v2)) * math.exp(
            -((m1 - m2) ** 2) / (2 * (v1 + v2))
        )
        assert got == pytest.approx(closed, rel=1e-8)

    def test_invalid_which(self):
        with pytest.raises(DomainError):
            ef_kappa(BERN, ConjugateHyper((1.0,), 2.0), DATA_DRUG, "prior_evidence")

    def test_undefined_term_is_named(self):
        # tau close to n0: doubling makes K(2 tau, 2 n0) improper only when
        # the posterior-side combination degenerates; here force it via n0
        with pytest.raises(ImproperMemberError) as err:
            ef_kappa(BERN, ConjugateHyper((0.4,), 0.5), [1, 1, 1], "prior_lik")
        assert "K(" in str(err.value)


class TestEfAffineKappa:
    def test_identical_is_one(self):
        h = ef_max_compatible(BERN, DATA_DRUG)
        assert ef_affine_kappa(BERN, h, DATA_DRUG, "prior_lik") == pytest.approx(
            1.0, abs=1e-12
        )

    def test_prior_post_is_hellinger_affinity(self):
        a, b = 2.0, 3.0
        n1, n = 2, 5
        h = ConjugateHyper((a,), a + b)
        data = [1, 1, 0, 0, 0]
        got = ef_affine_kappa(BERN, h, data, "prior_post")
        prior = canonical_beta_field(a, b)
        post = canonical_beta_field(a + n1, b + n - n1)
        assert got == pytest.approx(affine_compatibility(prior, post), abs=1e-8)

    def test_theta_scale_hellinger_equals_canonical_scale(self):
        # Hellinger affinity is invariant under the logit reparametrization
        from bayesgeom.densities import beta_field

        a, b = 2.0, 3.0
        data = [1, 1, 0, 0, 0]
        h = ConjugateHyper((a,), a + b)
        got = ef_affine_kappa(BERN, h, data, "prior_post")
        theta_scale = affine_compatibility(beta_field(2, 3), beta_field(4, 6))
        assert got == pytest.approx(theta_scale, abs=1e-6)

    def test_only_needed_terms_are_validated(self):
        # with no observed successes the likelihood-side member is improper,
        # so prior_lik fails while prior_post (which never touches it) works
        h = ConjugateHyper((2.0,), 5.0)
        data = [0, 0, 0]
        with pytest.raises(ImproperMemberError):
            ef_kappa(BERN, h, data, "prior_lik")
        with pytest.raises(ImproperMemberError):
            ef_affine_kappa(BERN, h, data, "prior_lik")
        assert 0 < ef_kappa(BERN, h, data, "prior_post") <= 1
        assert 0 < ef_affine_kappa(BERN, h, data, "prior_post") <= 1

    def test_max_compatible_maximises_affine_kappa(self):
        grid = [
            ConjugateHyper((tau,), n0)
            for tau in np.linspace(0.5, 5.0, 10)
            for n0 in np.linspace(6.0, 14.0, 9)
            if n0 - tau > 0
        ]
        best = max(grid, key=lambda h: ef_affine_kappa(BERN, h, DATA_DRUG, "prior_lik"))
        opt = ef_max_compatible(BERN, DATA_DRUG)
        # the exact optimum (2, 10) is on the grid
        assert best.tau == opt.tau and best.n0 == opt.n0


class TestMaxCompatible:
    def test_empty_data_improper_on_unbounded_support(self):
        with pytest.raises(ImproperMemberError):
            ef_max_compatible(BERN, [])

    def test_normal_known_variance_centers_at_sample_mean(self):
        s2 = 2.0
        fam = get_family("normal-known-variance", {"sigma_sq": s2})
        data = [0.4, 1.0, 1.6, -0.2]
        h = ef_max_compatible(fam, data)
        assert h.n0 == 4.0
        assert h.tau[0] == pytest.approx(sum(data) / s2, rel=1e-12)
        # the member is the Gaussian centered at the sample mean
        assert h.tau[0] * s2 / h.n0 == pytest.approx(np.mean(data), rel=1e-12)
        assert ef_kappa(fam, h, data, "prior_lik") == pytest.approx(1.0, abs=1e-8)

    def test_grid_argmax_bernoulli(self):
        taus = np.linspace(0.25, 5.0, 20)
        n0s = np.linspace(0.5, 10.0, 20)
        best_val, best_pair = -1.0, None
        for tau in taus:
            for n0 in n0s:
                if n0 - tau <= 0:
                    continue
                try:
                    val = ef_kappa(
                        BERN, ConjugateHyper((tau,), n0), DATA_DRUG, "prior_lik"
                    )
                except ImproperMemberError:
                    continue
                if val > best_val:
                    best_val, best_pair = val, (tau, n0)
        assert best_pair == (2.0, 10.0)
        assert best_val == pytest.approx(1.0, abs=1e-8)


class TestConjugacyClosure:
    def test_posterior_member_matches_normalized_product(self):
        a, b = 1.5, 2.5
        h = ConjugateHyper((a,), a + b)
        data = [1, 0, 1, 1, 0]
        st, n = sum_stats(BERN, data)
        post_hyper = ConjugateHyper((a + st[0],), h.n0 + n)
        log_k_post = log_K(BERN, post_hyper)

        def posterior_via_product(pts):
            eta = pts[:, 0]
            log_prior = (
                a * eta - (a + b) * np.logaddexp(0.0, eta) + log_K(BERN, h)
            )
            log_lik = st[0] * eta - n * np.logaddexp(0.0, eta)
            return log_prior + log_lik

        # normalize the product by quadrature and compare to the member
        region = BERN.theta_support
        from bayesgeom.numerics import log_integrate

        log_ml = log_integrate(posterior_via_product, region).log_value
        member = ScalarField(
            lambda pts: post_hyper.tau[0] * pts[:, 0]
            - post_hyper.n0 * np.logaddexp(0.0, pts[:, 0])
            + log_k_post,
            region,
            "posterior",
            check_l2=False,
        )
        product_normalized = ScalarField(
            lambda pts: posterior_via_product(pts) - log_ml,
            region,
            "posterior",
            check_l2=False,
        )
        diff = integrate(
            lambda pts: np.abs(
                np.exp(member.eval_log(pts)) - np.exp(product_normalized.eval_log(pts))
            ),
            region,
        )
        assert diff.value <= 1e-8


class TestRegistry:
    def test_known_names(self):
        assert get_family("bernoulli-canonical").name == "bernoulli-canonical"
        fam = get_family("normal-known-variance", {"sigma_sq": 2.0})
        assert fam.name == "normal-known-variance"

    def test_unknown_name(self):
        with pytest.raises(DomainError):
            get_family("poisson-gamma")

    def test_q_bounds(self):
        with pytest.raises(DomainError):
            ExpFamSpec(
                name="too-big",
                log_h=lambda y: 0.0,
                suff_stat=lambda y: np.zeros(4),
                log_cumulant=lambda eta: np.zeros(eta.shape[0]),
                eta_of_theta=lambda pts: pts,
                theta_support=SupportRegion.interval(0, 1),
                q=4,
            )
