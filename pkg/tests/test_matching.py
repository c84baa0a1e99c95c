import numpy as np
import pytest
from scipy.optimize import minimize
from scipy.special import expit

from ckdisc.errors import EmptyOverlapError, InvalidInputError
from ckdisc.matching import (
    PropensityModel,
    _design,
    _log_likelihood_grad,
    fit_multinomial,
    predict_propensities,
    vector_match,
)


class TestFitMultinomial:
    def test_uninformative_covariates_recover_frequencies(self):
        # Each group sees the covariate values 0 and 1 equally often, so the
        # MLE has zero coefficients and uniform fitted scores.
        x = np.tile([0.0, 1.0], 30)[:, None]
        t = np.repeat([1, 2, 3], 20)
        model = fit_multinomial(x, t)
        assert np.abs(model.coefficients).max() <= 1e-6
        p = predict_propensities(model, x)
        assert np.abs(p - 1.0 / 3.0).max() <= 1e-6

    def test_binary_case_matches_direct_logit_mle(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((200, 2))
        eta = 0.5 + x @ np.array([1.0, -0.7])
        t = np.where(rng.random(200) < expit(eta), 1, 2)
        model = fit_multinomial(x, t)
        xd = _design(x)
        z = (t == 1).astype(float)  # baseline is label 2, logit models group 1

        def nll(beta):
            lin = xd @ beta
            return float(np.sum(np.logaddexp(0.0, lin) - z * lin))

        opt = minimize(nll, np.zeros(3), method="BFGS", options={"gtol": 1e-10})
        assert np.abs(model.coefficients[0] - opt.x).max() <= 1e-6
        assert model.converged

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((40, 2))
        t = rng.integers(1, 4, size=40)
        t[:3] = [1, 2, 3]
        xd = _design(x)
        labels = np.unique(t)
        onehot = (t[:, None] == labels[None, :]).astype(float)

        def loglik(flat):
            coef = flat.reshape(2, 3)
            eta = np.column_stack([xd @ coef.T, np.zeros(40)])
            eta -= eta.max(axis=1, keepdims=True)
            logp = eta - np.log(np.exp(eta).sum(axis=1, keepdims=True))
            return float((onehot * logp).sum())

        for trial in range(10):
            flat = rng.standard_normal(6)
            analytic = _log_likelihood_grad(flat.reshape(2, 3), xd, onehot).ravel()
            eps = 1e-6
            numeric = np.empty(6)
            for i in range(6):
                hi, lo = flat.copy(), flat.copy()
                hi[i] += eps
                lo[i] -= eps
                numeric[i] = (loglik(hi) - loglik(lo)) / (2 * eps)
            scale = max(1.0, np.abs(numeric).max())
            assert np.abs(analytic - numeric).max() / scale <= 1e-5

    def test_single_group_rejected(self):
        with pytest.raises(InvalidInputError):
            fit_multinomial(np.zeros((10, 1)), np.ones(10, dtype=int))

    def test_too_few_samples_rejected(self):
        with pytest.raises(InvalidInputError):
            fit_multinomial(np.zeros((4, 1)), np.array([1, 1, 2, 2]))


class TestPredictPropensities:
    def test_zero_coefficients_give_uniform_scores(self):
        model = PropensityModel(
            coefficients=np.zeros((2, 2)),
            labels=np.array([1, 2, 3]),
            baseline=3,
            converged=True,
            n_iterations=0,
        )
        p = predict_propensities(model, np.array([[0.0], [5.0], [-5.0]]))
        np.testing.assert_allclose(p, 1.0 / 3.0)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        model = PropensityModel(
            coefficients=rng.standard_normal((2, 3)),
            labels=np.array([1, 2, 3]),
            baseline=3,
            converged=True,
            n_iterations=0,
        )
        p = predict_propensities(model, rng.standard_normal((20, 2)))
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(p >= 0)

    def test_extreme_linear_predictors_stay_finite(self):
        model = PropensityModel(
            coefficients=np.array([[0.0, 500.0]]),
            labels=np.array([1, 2]),
            baseline=2,
            converged=True,
            n_iterations=0,
        )
        p = predict_propensities(model, np.array([[1.0], [-1.0]]))
        assert np.all(np.isfinite(p))
        assert p[0, 0] == pytest.approx(1.0)
        assert p[1, 0] == pytest.approx(0.0, abs=1e-100)

    def test_dimension_mismatch(self):
        model = PropensityModel(
            coefficients=np.zeros((1, 3)),
            labels=np.array([1, 2]),
            baseline=2,
            converged=True,
            n_iterations=0,
        )
        with pytest.raises(InvalidInputError):
            predict_propensities(model, np.zeros((5, 1)))


class TestVectorMatch:
    def test_hand_example_cutoffs(self):
        t = np.array([1, 1, 2, 2])
        s1 = np.array([0.30, 0.55, 0.45, 0.80])
        scores = np.column_stack([s1, 1.0 - s1])
        match = vector_match(scores, t)
        # Group minima in column 1 are 0.30 and 0.45, so l = 0.45;
        # group maxima are 0.55 and 0.80, so h = 0.55.
        assert match.low[0] == pytest.approx(0.45)
        assert match.high[0] == pytest.approx(0.55)
        np.testing.assert_array_equal(match.retained, [1, 2])

    def test_identical_scores_retain_everything(self):
        scores = np.full((8, 2), 0.5)
        t = np.array([1, 1, 1, 1, 2, 2, 2, 2])
        match = vector_match(scores, t)
        np.testing.assert_array_equal(match.retained, np.arange(8))

    def test_boundary_samples_are_kept(self):
        # The samples defining the cutoffs satisfy the closed inequalities.
        rng = np.random.default_rng(4)
        for _ in range(20):
            s1 = rng.random(12)
            scores = np.column_stack([s1, 1.0 - s1])
            t = np.r_[np.ones(6, dtype=int), np.full(6, 2)]
            match = vector_match(scores, t)
            kept = scores[match.retained]
            assert np.all(kept >= match.low - 1e-15)
            assert np.all(kept <= match.high + 1e-15)

    def test_balanced_design_retains_most_samples(self):
        rng = np.random.default_rng(5)
        for trial in range(100):
            x = rng.standard_normal((100, 1))
            t = rng.integers(1, 3, size=100)
            model = fit_multinomial(x, t)
            scores = predict_propensities(model, x)
            match = vector_match(scores, t)
            assert match.retained.size >= 90

    def test_invariant_to_sample_order(self):
        rng = np.random.default_rng(6)
        s1 = rng.random(20)
        scores = np.column_stack([s1, 1.0 - s1])
        t = rng.integers(1, 3, size=20)
        t[:2] = [1, 2]
        perm = rng.permutation(20)
        m0 = vector_match(scores, t)
        m1 = vector_match(scores[perm], t[perm])
        np.testing.assert_allclose(m0.low, m1.low)
        np.testing.assert_allclose(m0.high, m1.high)
        np.testing.assert_array_equal(sorted(perm[m1.retained]), m0.retained)

    def test_disjoint_scores_raise(self):
        scores = np.array([[0.9, 0.1], [0.8, 0.2], [0.1, 0.9], [0.2, 0.8]])
        t = np.array([1, 1, 2, 2])
        with pytest.raises(EmptyOverlapError):
            vector_match(scores, t)

    def test_wrong_column_count(self):
        with pytest.raises(InvalidInputError):
            vector_match(np.zeros((4, 3)), np.array([1, 1, 2, 2]))

    def test_retained_shrinks_as_imbalance_grows(self):
        from ckdisc.sims import SimulationConfig, simulate

        sizes = []
        for balance in (1.0, 0.6, 0.2):
            total = 0
            for r in range(20):
                cfg = SimulationConfig("sigmoidal", balance=balance, seed=900 + r)
                ds = simulate(cfg).dataset
                model = fit_multinomial(ds.covariates, ds.groups)
                scores = predict_propensities(model, ds.covariates)
                total += vector_match(scores, ds.groups).retained.size
            sizes.append(total / 20)
        assert sizes[0] > sizes[1] > sizes[2]
