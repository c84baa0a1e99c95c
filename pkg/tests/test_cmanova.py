import numpy as np
import pytest
from scipy.stats import f as f_dist

from ckdisc.cmanova import cmanova_test, fit_mlm
from ckdisc.errors import HdlssError, InvalidInputError, SingularDesignError


class TestFitMlm:
    def test_intercept_only_constant_outcome(self):
        y = np.full((10, 1), 3.0)
        fit = fit_mlm(y, np.ones((10, 1)))
        assert np.abs(fit.residuals).max() == pytest.approx(0.0, abs=1e-14)
        assert np.abs(fit.residual_sscp).max() == pytest.approx(0.0, abs=1e-14)

    def test_exact_linear_fit(self):
        rng = np.random.default_rng(0)
        x = np.column_stack([np.ones(12), rng.standard_normal((12, 2))])
        coef = rng.standard_normal((3, 4))
        fit = fit_mlm(x @ coef, x)
        assert np.abs(fit.residual_sscp).max() <= 1e-18

    def test_matches_normal_equations_oracle(self):
        rng = np.random.default_rng(1)
        x = np.column_stack([np.ones(20), rng.standard_normal((20, 3))])
        y = rng.standard_normal((20, 2))
        fit = fit_mlm(y, x)
        oracle = np.linalg.solve(x.T @ x, x.T @ y)
        assert np.abs(fit.coefficients - oracle).max() <= 1e-8

    def test_rank_deficient_design(self):
        x = np.ones((10, 2))  # duplicated intercept column
        with pytest.raises(SingularDesignError):
            fit_mlm(np.zeros((10, 1)), x)

    def test_hdlss_guard(self):
        rng = np.random.default_rng(2)
        with pytest.raises(HdlssError):
            fit_mlm(rng.standard_normal((10, 10)), np.ones((10, 1)))


def _gaussian_groups(rng, n=100, d=5, offset=0.0):
    x = rng.standard_normal((n, 1))
    t = rng.integers(1, 3, size=n)
    y = x + rng.standard_normal((n, d))
    y[t == 2] += offset
    return y, t, x


class TestCmanovaTest:
    def test_level_under_null(self):
        rng = np.random.default_rng(3)
        runs = 200
        rejections = 0
        for _ in range(runs):
            y, t, x = _gaussian_groups(rng)
            rejections += cmanova_test(y, t, x).p_value <= 0.05
        assert 0.02 <= rejections / runs <= 0.09

    def test_power_under_mean_shift(self):
        rng = np.random.default_rng(4)
        runs = 200
        rejections = 0
        for _ in range(runs):
            y, t, x = _gaussian_groups(rng, offset=1.0)
            rejections += cmanova_test(y, t, x).p_value <= 0.05
        assert rejections / runs >= 0.9

    def test_blind_to_variance_differences(self):
        # Second-moment-only group differences are invisible to a mean model.
        from ckdisc.sims import SimulationConfig, simulate

        runs = 100
        rejections = 0
        for r in range(runs):
            cfg = SimulationConfig(
                "heteroskedastic", n=100, D=10, balance=0.8, effect=1.0, seed=500 + r
            )
            ds = simulate(cfg).dataset
            rejections += cmanova_test(ds.outcomes, ds.groups, ds.covariates).p_value <= 0.05
        assert rejections / runs <= 0.12

    def test_pillai_trace_in_range(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            y, t, x = _gaussian_groups(rng, n=40, d=3)
            res = cmanova_test(y, t, x)
            s = min(3, 2)  # D=3, q=2 added predictors for K=2, r=1
            assert 0.0 <= res.pillai_trace <= s

    def test_invariant_under_group_relabeling(self):
        rng = np.random.default_rng(6)
        y, t, x = _gaussian_groups(rng, offset=0.4)
        relabeled = np.where(t == 1, 2, 1)
        p0 = cmanova_test(y, t, x).p_value
        p1 = cmanova_test(y, relabeled, x).p_value
        assert p0 == pytest.approx(p1, abs=1e-12)

    def test_univariate_reduces_to_partial_f(self):
        rng = np.random.default_rng(7)
        y, t, x = _gaussian_groups(rng, d=1, offset=0.5)
        res = cmanova_test(y, t, x)
        # Direct RSS-based partial F for the added group terms.
        null = np.column_stack([np.ones(len(t)), x])
        ind = (t == 2).astype(float)
        alt = np.column_stack([null, ind, ind[:, None] * x])
        rss = []
        for design in (null, alt):
            coef, *_ = np.linalg.lstsq(design, y, rcond=None)
            rss.append(float(((y - design @ coef) ** 2).sum()))
        q = alt.shape[1] - null.shape[1]
        df2 = len(t) - alt.shape[1]
        f_direct = ((rss[0] - rss[1]) / q) / (rss[1] / df2)
        assert res.f_statistic == pytest.approx(f_direct, abs=1e-10)
        assert res.p_value == pytest.approx(float(f_dist.sf(f_direct, q, df2)), abs=1e-10)

    def test_group_size_validation(self):
        with pytest.raises(InvalidInputError):
            cmanova_test(np.zeros((5, 1)), np.array([1, 1, 1, 1, 2]), np.zeros((5, 1)))
