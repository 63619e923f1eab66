import itertools

import numpy as np
import pytest
from scipy import stats
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from copair.dependence import (
    EmpiricalCdfTransformer,
    PseudoObservations,
    ecdf_build,
    kendall_tau,
    pit_transform,
)
from copair.exceptions import LengthMismatch, NonFinite


def brute_force_tau(x, y):
    """Concordant minus discordant pairs over all C(n, 2) pairs, in integers."""
    x, y = [float(a) for a in x], [float(b) for b in y]
    num = 0
    for i, j in itertools.combinations(range(len(x)), 2):
        dx = (x[i] > x[j]) - (x[i] < x[j])
        dy = (y[i] > y[j]) - (y[i] < y[j])
        num += dx * dy
    n = len(x)
    return num / (n * (n - 1) / 2)


def _instance(rng):
    n = int(rng.integers(2, 201))
    kind = rng.integers(3)
    if kind == 0:
        x = rng.standard_normal(n)
        y = 0.5 * x + rng.standard_normal(n)
    elif kind == 1:
        # heavy ties
        x = rng.integers(0, 5, n).astype(float)
        y = rng.integers(0, 5, n).astype(float)
    else:
        x = np.round(rng.standard_normal(n), 1)
        y = -x + np.round(rng.standard_normal(n), 1)
    return x, y


class TestKendallTau:
    def test_concordant(self):
        assert kendall_tau([1, 2, 3], [1, 2, 3]) == 1.0

    def test_discordant(self):
        assert kendall_tau([1, 2, 3], [3, 2, 1]) == -1.0

    def test_one_swap(self):
        assert kendall_tau([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(4 / 6, abs=1e-15)

    def test_ties_count_zero(self):
        # pairs (0,1) tied in x, (2,3) tied in y; the rest concordant
        assert kendall_tau([1, 1, 2, 3], [1, 2, 3, 3]) == pytest.approx(4 / 6, abs=1e-15)

    @pytest.mark.parametrize("seed", range(20))
    def test_brute_force(self, seed):
        x, y = _instance(np.random.default_rng(seed))
        assert kendall_tau(x, y) == brute_force_tau(x, y)

    def test_crosses_block_boundary(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal(600)
        y = x + rng.standard_normal(600)
        assert kendall_tau(x, y) == brute_force_tau(x, y)

    def test_no_ties_matches_scipy(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(300)
        y = x**3 + rng.standard_normal(300)
        assert kendall_tau(x, y) == pytest.approx(stats.kendalltau(x, y).statistic, abs=1e-14)

    def test_symmetry_and_sign(self):
        rng = np.random.default_rng(3)
        x, y = rng.standard_normal(150), rng.standard_normal(150)
        t = kendall_tau(x, y)
        assert kendall_tau(y, x) == t
        assert kendall_tau(x, -y) == -t

    def test_monotone_invariance(self):
        rng = np.random.default_rng(4)
        x, y = rng.standard_normal(150), rng.standard_normal(150)
        assert abs(kendall_tau(np.exp(x), y) - kendall_tau(x, y)) <= 1e-15

    def test_errors(self):
        with pytest.raises(LengthMismatch):
            kendall_tau([1, 2, 3], [1, 2])
        with pytest.raises(ValueError):
            kendall_tau([1.0], [1.0])


class TestEcdf:
    def test_examples(self):
        cdf = ecdf_build([3, 1, 4, 2])
        assert cdf.evaluate(2.5) == 0.5
        assert cdf.evaluate(0.0) == 0.0
        assert cdf.evaluate(4.0) == 1.0
        assert cdf.evaluate(2.0) == 0.5

    def test_vectorized(self):
        cdf = ecdf_build([1, 2, 3, 4])
        np.testing.assert_array_equal(cdf.evaluate([0, 1, 3.5, 9]), [0, 0.25, 0.75, 1.0])

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            ecdf_build([1.0, np.inf, 2.0])


class TestPit:
    def test_examples(self):
        cdf = ecdf_build([1, 2, 3, 4])
        assert pit_transform(cdf, 2.0) == pytest.approx(0.4, abs=1e-15)
        assert pit_transform(cdf, -10.0) == pytest.approx(0.2, abs=1e-15)
        assert pit_transform(cdf, 10.0) == pytest.approx(0.8, abs=1e-15)

    def test_bounds_and_monotone(self):
        rng = np.random.default_rng(0)
        cdf = ecdf_build(rng.standard_normal(50))
        grid = np.linspace(-5, 5, 1001)
        u = pit_transform(cdf, grid)
        assert np.all(np.diff(u) >= 0)
        assert u.min() == pytest.approx(1 / 51) and u.max() == pytest.approx(50 / 51)

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            pit_transform(ecdf_build([1, 2, 3]), [np.nan])


class TestTransformer:
    def test_fit_transform(self):
        rng = np.random.default_rng(0)
        X = rng.standard_normal((100, 2))
        tr = EmpiricalCdfTransformer().fit(X)
        U = tr.transform(X)
        assert U.shape == (100, 2)
        # in-sample ranks scaled by n/(n+1)
        ranks = stats.rankdata(X[:, 0])
        np.testing.assert_allclose(U[:, 0], ranks / 101, atol=1e-15)
        assert tr.n_features_in_ == 2 and len(tr.cdfs_) == 2

    def test_pseudo(self):
        X = np.random.default_rng(1).standard_normal((60, 2))
        pseudo = EmpiricalCdfTransformer().fit(X).transform_pseudo(X)
        assert isinstance(pseudo, PseudoObservations)
        assert pseudo.n == 60
        assert pseudo.to_array().shape == (60, 2)

    def test_unfitted_and_shape(self):
        X = np.random.default_rng(2).standard_normal((20, 2))
        with pytest.raises(NotFittedError):
            EmpiricalCdfTransformer().transform(X)
        tr = clone(EmpiricalCdfTransformer()).fit(X)
        with pytest.raises(ValueError):
            tr.transform(X[:, :1])

    def test_pseudo_validation(self):
        with pytest.raises(ValueError):
            PseudoObservations(np.array([0.0, 0.5]), np.array([0.5, 0.5]))
        with pytest.raises(LengthMismatch):
            PseudoObservations(np.array([0.5]), np.array([0.5, 0.5]))
