import numpy as np
import pytest
from statsmodels.tsa.stattools import adfuller

from copair.exceptions import (
    DegenerateRegressor,
    NonFiniteSpread,
    SingularDesign,
    TooShort,
    UnknownSymbol,
    UnsupportedTest,
)
from copair.market_data import PricePanel, PriceSeries
from copair.unit_root import (
    SpreadSeries,
    adf_test,
    critical_values,
    kss_test,
    make_spread,
    ols_beta_no_intercept,
    p_value,
)
from copair.unit_root.tables import LEVELS, N_GRID, null_statistics


def _panel(ref, **alts):
    ts = 1_609_459_200 + 3600 * np.arange(len(ref))
    others = tuple(PriceSeries(k, ts, v) for k, v in alts.items())
    return PricePanel(PriceSeries("BTCUSDT", ts, ref), others)


def _random_walk(rng, n):
    return np.cumsum(rng.standard_normal(n))


class TestOls:
    def test_exact_relation(self):
        assert ols_beta_no_intercept([2, 4, 6], [1, 2, 3]) == 2.0

    def test_normal_equation(self):
        assert ols_beta_no_intercept([1, 1], [1, 2]) == pytest.approx(0.6, abs=1e-15)

    def test_identity(self):
        x = np.random.default_rng(0).uniform(1, 2, 50)
        assert ols_beta_no_intercept(x, x) == pytest.approx(1.0, abs=1e-15)

    def test_zero_regressor(self):
        with pytest.raises(DegenerateRegressor):
            ols_beta_no_intercept([1, 2, 3], [0, 0, 0])

    def test_too_short(self):
        with pytest.raises(ValueError):
            ols_beta_no_intercept([1.0], [1.0])


class TestMakeSpread:
    def test_same_series(self):
        x = np.linspace(10, 20, 30)
        sp = make_spread(_panel(x, ALT=x), "ALT")
        assert isinstance(sp, SpreadSeries)
        assert sp.beta == pytest.approx(1.0, abs=1e-14)
        np.testing.assert_allclose(sp.values, 0.0, atol=1e-12)
        assert len(sp.values) == len(sp.timestamps) == 30

    def test_double(self):
        x = np.linspace(10, 20, 30)
        sp = make_spread(_panel(2 * x, ALT=x), "ALT")
        assert sp.beta == pytest.approx(2.0, abs=1e-14)
        np.testing.assert_allclose(sp.values, 0.0, atol=1e-12)

    def test_unknown_symbol(self):
        x = np.linspace(10, 20, 30)
        with pytest.raises(UnknownSymbol):
            make_spread(_panel(x, ALT=x), "NOPE")

    def test_slope_recovery(self):
        # 1000 paths of ref = 1.5 alt + AR(1) noise; the slope estimates centre on 1.5
        rng = np.random.default_rng(7)
        n = 500
        betas = []
        for _ in range(1000):
            alt = 100 + _random_walk(rng, n)
            e = np.zeros(n)
            shocks = rng.standard_normal(n)
            for t in range(1, n):
                e[t] = 0.5 * e[t - 1] + shocks[t]
            betas.append(ols_beta_no_intercept(1.5 * alt + e, alt))
        betas = np.array(betas)
        se = betas.std(ddof=1) / np.sqrt(betas.size)
        assert abs(betas.mean() - 1.5) < 4 * se + 1e-4


class TestAdfOracle:
    @pytest.mark.parametrize("seed", range(8))
    def test_matches_statsmodels(self, seed):
        rng = np.random.default_rng(seed)
        n = 300 + 100 * seed
        y = np.empty(n)
        y[0] = 0.0
        phi = 1.0 if seed % 2 else 0.9
        e = rng.standard_normal(n)
        for t in range(1, n):
            y[t] = phi * y[t - 1] + e[t] + 0.3 * e[t - 1]
        ref = adfuller(y, maxlag=12, regression="n", autolag="AIC")
        res = adf_test(y, max_lags=12)
        assert res.statistic == pytest.approx(ref[0], rel=1e-10, abs=1e-12)
        assert res.lags == ref[2]
        assert res.n_obs == ref[3]
        assert res.test == "ADF_nc"

    @pytest.mark.parametrize("fn", [adf_test, kss_test])
    @pytest.mark.parametrize("c", [1e-3, -2.0, 1e4])
    def test_scale_invariance(self, fn, c):
        y = _random_walk(np.random.default_rng(3), 800)
        a, b = fn(y), fn(c * y)
        assert b.statistic == pytest.approx(a.statistic, rel=1e-9)
        assert b.lags == a.lags


class TestErrors:
    @pytest.mark.parametrize("fn", [adf_test, kss_test])
    def test_constant(self, fn):
        with pytest.raises(SingularDesign):
            fn(np.full(200, 3.0))

    @pytest.mark.parametrize("fn", [adf_test, kss_test])
    def test_zeros(self, fn):
        with pytest.raises(SingularDesign):
            fn(np.zeros(200))

    @pytest.mark.parametrize("fn", [adf_test, kss_test])
    def test_too_short(self, fn):
        with pytest.raises(TooShort):
            fn(np.arange(21.0), max_lags=12)

    @pytest.mark.parametrize("fn", [adf_test, kss_test])
    def test_non_finite(self, fn):
        y = _random_walk(np.random.default_rng(0), 100)
        y[5] = np.nan
        with pytest.raises(NonFiniteSpread):
            fn(y)

    def test_result_invariants(self):
        res = kss_test(_random_walk(np.random.default_rng(1), 400))
        assert 0.0 <= res.p_value <= 1.0
        assert res.n_obs > res.lags + 1
        assert res.test == "KSS_raw"


class TestPower:
    def test_adf_rejects_white_noise(self):
        rng = np.random.default_rng(11)
        rejects = [adf_test(rng.standard_normal(2000)).passes(0.10) for _ in range(100)]
        assert np.mean(rejects) == 1.0

    def test_size_small_sample(self):
        # 400 random walks: rejection rate near 10% (loose bound for the quick check)
        rng = np.random.default_rng(5)
        rate = np.mean([adf_test(_random_walk(rng, 500), max_lags=4).passes(0.10) for _ in range(400)])
        assert 0.06 < rate < 0.14


class TestTables:
    @pytest.mark.parametrize("test", ["ADF_nc", "KSS_raw"])
    @pytest.mark.parametrize("n", [25, 60, 250, 1000, 4000, 20000])
    def test_ordering(self, test, n):
        cv = critical_values(test, n)
        assert cv[0.01] < cv[0.05] < cv[0.10] < 0

    def test_grid_points(self):
        cv = critical_values("ADF_nc", 1000)
        assert cv[0.01] == pytest.approx(-2.551, abs=2e-3)
        assert cv[0.05] == pytest.approx(-1.937, abs=2e-3)
        assert cv[0.10] == pytest.approx(-1.618, abs=2e-3)

    def test_between_grid_points(self):
        lo, hi = critical_values("KSS_raw", 750)[0.05], critical_values("KSS_raw", 1000)[0.05]
        mid = critical_values("KSS_raw", 850)[0.05]
        assert min(lo, hi) <= mid <= max(lo, hi)

    def test_unsupported(self):
        with pytest.raises(UnsupportedTest):
            critical_values("PP", 100)
        with pytest.raises(ValueError):
            critical_values("ADF_nc", 10)

    @pytest.mark.parametrize("test", ["ADF_nc", "KSS_raw"])
    def test_p_value_monotone(self, test):
        stats_ = np.linspace(-6, 3, 200)
        p = np.array([p_value(test, s, 1000) for s in stats_])
        assert np.all(np.diff(p) >= 0)
        assert p.min() >= LEVELS[0] and p.max() <= LEVELS[-1]

    @pytest.mark.parametrize("test", ["ADF_nc", "KSS_raw"])
    def test_p_value_at_critical(self, test):
        cv = critical_values(test, 1000)
        for level, val in cv.items():
            assert p_value(test, val, 1000) == pytest.approx(level, rel=1e-6)

    def test_grid_constant(self):
        assert N_GRID[0] == 25 and list(N_GRID) == sorted(N_GRID)

    @pytest.mark.slow
    def test_fresh_monte_carlo(self):
        # an independent 50,000 path simulation reproduces the 10% values
        rng = np.random.default_rng(987654321)
        adf, kss = null_statistics(1000, 50_000, rng)
        for test, sims in (("ADF_nc", adf), ("KSS_raw", kss)):
            fresh = np.quantile(sims, 0.10)
            assert abs(fresh - critical_values(test, 1000)[0.10]) < 0.03
