import numpy as np
import pytest

from ivlasso.estimators import assemble_gram, min_dk_estimate
from ivlasso.ivcore import Kernel
from ivlasso.models import EstimatorConfig
from ivlasso.simulate import (
    FIXED_THETA,
    DgpSpec,
    InnovationSpec,
    aci_residuals,
    compare_estimators,
    dgp,
    diverging_p,
    gen_dataset,
    gen_innovations,
    gen_regressors,
    monte_carlo,
    replication_rngs,
    report_csv,
    report_table,
    simulate_aci,
)


def gen(seed=0):
    return np.random.Generator(np.random.Philox(seed))


class TestSpecs:
    def test_diverging_p(self):
        assert diverging_p(100) == 13
        assert diverging_p(1000) == 30 and diverging_p(8) == 6 and diverging_p(400) == 22

    def test_defaults(self):
        s = dgp(4, 100)
        assert s.p == 13 and len(s.theta0) == 13 and s.theta0[:3] == (0, 0, 2.75)
        assert dgp(1, 50).theta0 == FIXED_THETA and dgp(1, 50).innovation.kind == "aci-process"
        assert dgp(3, 50).innovation.kind == "bivariate-normal"
        assert dgp(3, 50).innovation.covariance == ((1.0, 0.75), (0.75, 1.0))

    def test_theta_length_checked(self):
        with pytest.raises(ValueError):
            DgpSpec("diverging-p-gaussian", 100, theta0=(1.0,) * 5)

    def test_nonstationary_aci(self):
        with pytest.raises(ValueError):
            InnovationSpec("aci-process", beta1=1.0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            DgpSpec("fixed-p-cauchy", 10)


class TestRegressors:
    def test_identity_covariance_uncorrelated(self):
        T = 20000
        x = gen_regressors(dgp(3, T, regressor_covariance=np.eye(2)), gen(1))
        assert x.shape == (T, 8, 2)
        for j in range(8):
            assert abs(np.corrcoef(x[:, j, 0], x[:, j, 1])[0, 1]) < 3 / np.sqrt(T)

    def test_default_covariance(self):
        x = gen_regressors(dgp(3, 50000), gen(2))
        cov = np.cov(x[:, 0, 0], x[:, 0, 1])
        np.testing.assert_allclose(cov, [[4, 2], [2, 4]], rtol=0.05)

    def test_non_spd_rejected(self):
        with pytest.raises(ValueError):
            dgp(3, 10, regressor_covariance=np.zeros((2, 2)))
        with pytest.raises(ValueError):
            dgp(3, 10, regressor_covariance=[[1, 2], [2, 1]])

    def test_reproducible(self):
        a = gen_regressors(dgp(3, 30), gen(5))
        b = gen_regressors(dgp(3, 30), gen(5))
        assert np.array_equal(a, b)


class TestInnovations:
    def test_gaussian_correlation(self):
        T = 20000
        u = gen_innovations(InnovationSpec(), T, gen(3))
        assert abs(np.corrcoef(u[:, 0], u[:, 1])[0, 1] - 0.75) < 3 / np.sqrt(T)
        assert np.all(np.abs(u.mean(axis=0)) < 4 / np.sqrt(T))

    def test_aci_without_memory_is_shocks_plus_constants(self):
        spec = InnovationSpec("aci-process", alpha0=0.3, beta0=0.4, beta1=0.0)
        path, shocks = simulate_aci(spec, 100, gen(4))
        np.testing.assert_allclose(path - shocks, np.tile([0.3 - 0.2, 0.3 + 0.2], (100, 1)), atol=1e-15)

    def test_aci_residuals_recover_shocks_with_true_params(self):
        spec = InnovationSpec("aci-process")
        path, shocks = simulate_aci(spec, 200, gen(5))
        resid = aci_residuals(path, spec.kernel, (spec.alpha0, spec.beta0, spec.beta1))
        np.testing.assert_allclose(resid, shocks[1:], atol=1e-12)

    def test_aci_bootstrap_centered(self):
        T = 5000
        u = gen_innovations(InnovationSpec("aci-process"), T, gen(6))
        sd = u.std(axis=0)
        assert np.all(np.abs(u.mean(axis=0)) < 4 * sd / np.sqrt(T))

    def test_zero(self):
        assert np.all(gen_innovations(InnovationSpec("zero"), 5, gen(0)) == 0)


class TestDataset:
    def test_noiseless_identification(self):
        spec = dgp(1, 60, innovation=InnovationSpec("zero"))
        s = gen_dataset(spec, gen(7))
        np.testing.assert_allclose(min_dk_estimate(assemble_gram(s, Kernel(5, 1, 1))), spec.theta0, atol=1e-10)

    def test_dimensions_and_intercepts(self):
        s = gen_dataset(dgp(3, 80), gen(8))
        assert (s.T, s.p) == (80, 10)
        assert s.constant_columns() == [0] and s.unit_columns() == [1]
        assert gen_dataset(dgp(4, 100), gen(8)).p == 13

    def test_bound_form(self):
        spec = dgp(3, 40)
        rng_a, rng_b = gen(9), gen(9)
        s = gen_dataset(spec, rng_a)
        x = gen_regressors(spec, rng_b)
        u = gen_innovations(spec.innovation, 40, rng_b)
        th = np.asarray(spec.theta0)
        yl = th[0] - th[1] / 2 + x[..., 0] @ th[2:] + u[:, 0]
        yr = th[0] + th[1] / 2 + x[..., 1] @ th[2:] + u[:, 1]
        np.testing.assert_allclose(s.responses, np.column_stack([yl, yr]), atol=1e-12)


def truth(spec):
    return lambda sample: np.array(spec.theta0)


class TestMonteCarlo:
    def test_truth_stub(self):
        spec = dgp(3, 30)
        rep = monte_carlo(spec, truth(spec), 5)
        assert np.all(rep.bias == 0) and np.all(rep.sd == 0) and np.all(rep.rmse == 0)
        assert rep.exact_zero_rate == 1.0 and rep.retained_rate == 1.0

    def test_identical_seeds(self):
        rep = monte_carlo(dgp(3, 40), EstimatorConfig("acix"), 2, seeds=[11, 11])
        assert np.all(rep.sd == 0)

    def test_rmse_identity(self):
        rep = monte_carlo(dgp(3, 40), EstimatorConfig("acix"), 30)
        n = rep.estimates.shape[0]
        np.testing.assert_allclose(rep.rmse ** 2, rep.bias ** 2 + rep.sd ** 2, rtol=1e-10)
        sample_sd = rep.estimates.std(axis=0, ddof=1)
        np.testing.assert_allclose(rep.rmse ** 2, rep.bias ** 2 + sample_sd ** 2 * (n - 1) / n, rtol=1e-10)

    def test_thread_independent(self):
        ests = {"PLR": EstimatorConfig("plr"), "ACIX": EstimatorConfig("acix")}
        a = compare_estimators(dgp(3, 40, seed=3), ests, 12, threads=1)
        b = compare_estimators(dgp(3, 40, seed=3), ests, 12, threads=4)
        for k in ests:
            assert np.array_equal(a[k].estimates, b[k].estimates)
        assert report_csv(a) == report_csv(b)

    def test_streams_are_independent(self):
        r = replication_rngs(0, 3)
        draws = [g.standard_normal(4) for g in r]
        assert not np.array_equal(draws[0], draws[1])

    def test_failures_recorded(self):
        calls = []

        def flaky(sample):
            calls.append(1)
            if len(calls) % 2:
                raise RuntimeError("boom")
            return np.zeros(sample.p)

        rep = monte_carlo(dgp(3, 20), flaky, 4)
        assert rep.n_failed == 2 and rep.estimates.shape == (2, 10) and "boom" in rep.failures[0]

    def test_needs_two(self):
        with pytest.raises(ValueError):
            monte_carlo(dgp(3, 20), EstimatorConfig("acix"), 1)

    def test_tables(self):
        spec = dgp(3, 30)
        reps = compare_estimators(spec, {"ACIX": EstimatorConfig("acix")}, 3)
        text = report_table(reps, "title")
        assert text.splitlines()[0] == "title" and "RMSE" in text and "delta4" in text
        lines = report_csv(reps).splitlines()
        assert lines[0] == "parameter,statistic,model,value" and len(lines) == 1 + 3 * 10
