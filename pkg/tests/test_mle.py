import math

import numpy as np
import pytest
from scipy import stats

from kumiw import (
    DataError,
    KumIwParams,
    SubModel,
    censored_loglik,
    fit_mle,
    log_pdf,
    lr_test,
    observed_information,
    survival,
    wald_ci,
)
from kumiw.mle import FitResult, finite_difference_hessian
from kumiw.survdata import CensoredDataset, simulate_censored

TRUTH = KumIwParams(2.0, 1.5, 3.0)


class TestCensoredLoglik:
    def test_uncensored_equals_sum_log_pdf(self):
        d = simulate_censored(TRUTH, 40, 0.0, 1)
        p = KumIwParams(1.7, 1.2, 2.5)
        assert censored_loglik(p, d) == pytest.approx(
            float(np.sum(log_pdf(p, d.times))), rel=1e-12
        )

    def test_all_censored_equals_sum_log_survival(self):
        d = CensoredDataset.from_arrays([1.0, 2.0, 4.0], [0, 0, 0])
        p = KumIwParams(2.0, 1.0, 1.5)
        assert censored_loglik(p, d) == pytest.approx(
            float(np.sum(np.log(survival(p, d.times)))), rel=1e-12
        )

    def test_hand_value(self):
        d = CensoredDataset.from_arrays([1.0, 2.0], [1, 0])
        p = KumIwParams(1.0, 1.0, 1.0)
        assert censored_loglik(p, d) == pytest.approx(
            -1.0 + math.log(1 - math.exp(-0.5)), rel=1e-14
        )

    def test_permutation_invariant(self):
        rng = np.random.default_rng(10)
        d = simulate_censored(TRUTH, 30, 0.3, 3)
        perm = rng.permutation(len(d))
        d2 = CensoredDataset.from_arrays(d.times[perm], d.event_mask[perm])
        p = KumIwParams(1.5, 2.0, 2.0)
        assert censored_loglik(p, d) == pytest.approx(censored_loglik(p, d2), rel=1e-13)

    def test_never_nan(self):
        d = CensoredDataset.from_arrays([1.0, 2.0], [1, 0])
        for p in (KumIwParams(1e-300, 1e300, 1e3), KumIwParams(1e300, 1e-300, 500.0)):
            val = censored_loglik(p, d)
            assert not math.isnan(val)


class TestFitMle:
    def test_simulation_recovery(self):
        d = simulate_censored(TRUTH, 1000, 0.0, 7)
        fit = fit_mle(d)
        assert fit.converged
        for est, true in zip(fit.params.as_array(), TRUTH.as_array()):
            assert abs(est - true) / true <= 0.15

    def test_loglik_dominates_truth(self):
        d = simulate_censored(TRUTH, 400, 0.2, 21)
        fit = fit_mle(d, init=TRUTH)
        assert fit.converged
        assert fit.loglik >= censored_loglik(TRUTH, d)

    def test_gradient_certificate(self):
        d = simulate_censored(TRUTH, 300, 0.1, 31)
        fit = fit_mle(d)
        assert fit.converged and fit.grad_norm <= 1e-6

    def test_score_small_on_original_scale(self):
        from kumiw.mle import _Loglik, _central_gradient

        d = simulate_censored(TRUTH, 300, 0.1, 33)
        fit = fit_mle(d)
        ll = _Loglik(d)
        score = _central_gradient(lambda th: ll(th[0], th[1], th[2]), fit.params.as_array())
        assert float(np.max(np.abs(score))) <= 1e-4

    def test_scale_equivariance(self):
        d = simulate_censored(TRUTH, 500, 0.2, 11)
        fit1 = fit_mle(d)
        scale = 3.7
        d2 = CensoredDataset.from_arrays(d.times * scale, d.event_mask)
        fit2 = fit_mle(d2)
        assert fit2.params.c / fit1.params.c == pytest.approx(scale, rel=1e-3)
        assert fit2.params.b == pytest.approx(fit1.params.b, rel=1e-3)
        assert fit2.params.beta == pytest.approx(fit1.params.beta, rel=1e-3)

    def test_too_few_events(self):
        d = CensoredDataset.from_arrays([1.0, 2.0, 3.0, 4.0], [1, 1, 0, 0])
        with pytest.raises(DataError):
            fit_mle(d)

    def test_degenerate_data_no_crash(self):
        d = CensoredDataset.from_arrays([2.0] * 20, [1] * 20)
        fit = fit_mle(d)
        assert not fit.converged or fit.covariance is None

    def test_ci_positive_bounds(self):
        d = simulate_censored(TRUTH, 500, 0.2, 13)
        fit = fit_mle(d)
        assert fit.ci is not None
        for lo, hi in fit.ci.values():
            assert 0 < lo < hi


class TestObservedInformation:
    def test_quadratic_calibration(self):
        # finite differences must recover a known quadratic Hessian
        q = np.array([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]])
        center = np.array([0.7, 1.3, 2.1])

        def f(x):
            delta = x - center
            return -0.5 * float(delta @ q @ delta)

        hess = finite_difference_hessian(f, np.array([1.0, 1.0, 1.0]))
        np.testing.assert_allclose(-hess, q, atol=1e-6)

    def test_positive_definite_at_clean_fit(self):
        d = simulate_censored(TRUTH, 1000, 0.0, 17)
        fit = fit_mle(d)
        eigs = np.linalg.eigvalsh(observed_information(fit.params, d))
        assert np.all(eigs > 0)

    def test_exact_symmetry(self):
        d = simulate_censored(TRUTH, 100, 0.0, 19)
        info = observed_information(KumIwParams(2, 1.5, 3), d)
        np.testing.assert_array_equal(info, info.T)


class TestWaldCi:
    def test_normal_quantile(self):
        assert stats.norm.ppf(0.975) == pytest.approx(1.959964, abs=1e-6)

    def test_level_ordering(self):
        d = simulate_censored(TRUTH, 500, 0.2, 23)
        fit = fit_mle(d)
        narrow = wald_ci(fit, 0.90)
        wide = wald_ci(fit, 0.99)
        for name in ("b", "c", "beta"):
            assert wide[name][0] < narrow[name][0] < narrow[name][1] < wide[name][1]

    def test_zero_se_degenerate_interval(self):
        fit = FitResult(
            params=KumIwParams(2.0, 1.5, 3.0),
            loglik=0.0,
            observed_info=np.eye(3),
            covariance=np.zeros((3, 3)),
            ci=None,
            ci_level=0.95,
            converged=True,
            iterations=1,
            grad_norm=0.0,
        )
        ci = wald_ci(fit, 0.95)
        assert ci["b"] == (2.0, 2.0) and ci["beta"] == (3.0, 3.0)

    def test_missing_covariance_rejected(self):
        fit = FitResult(
            params=TRUTH, loglik=0.0, observed_info=None, covariance=None,
            ci=None, ci_level=0.95, converged=False, iterations=0, grad_norm=math.inf,
        )
        with pytest.raises(ValueError):
            wald_ci(fit, 0.95)

    def test_invalid_level(self):
        d = simulate_censored(TRUTH, 200, 0.0, 29)
        fit = fit_mle(d)
        with pytest.raises(ValueError):
            wald_ci(fit, 1.0)


class TestLrTest:
    def test_full_model_null_is_trivial(self):
        d = simulate_censored(TRUTH, 200, 0.0, 37)
        res = lr_test(d, SubModel.KUM_IW)
        assert res.statistic == 0.0 and res.p_value == 1.0 and res.df == 0

    def test_iw_null_on_kumiw_data_rejects(self):
        d = simulate_censored(KumIwParams(5.0, 1.0, 2.0), 500, 0.0, 41)
        res = lr_test(d, SubModel.IW)
        assert res.df == 1
        assert res.p_value < 0.05

    def test_iw_null_on_iw_data_accepts_mostly(self):
        d = simulate_censored(KumIwParams(1.0, 1.5, 3.0), 400, 0.0, 43)
        res = lr_test(d, SubModel.IW)
        assert res.statistic >= 0.0
        assert res.p_value > 0.01

    def test_two_pin_null_df(self):
        d = simulate_censored(TRUTH, 300, 0.0, 47)
        res = lr_test(d, SubModel.IE)
        assert res.df == 2 and res.statistic >= 0.0

    def test_statistic_nonnegative_across_seeds(self):
        for seed in range(5):
            d = simulate_censored(KumIwParams(1.0, 1.5, 3.0), 150, 0.2, 5100 + seed)
            res = lr_test(d, SubModel.IW)
            assert res.statistic >= 0.0
