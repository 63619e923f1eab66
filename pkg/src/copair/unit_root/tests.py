"""ADF (no constant, no trend) and KSS (raw data) unit-root regressions."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import NonFiniteSpread, SingularDesign, TooShort
from .tables import p_value

DEFAULT_MAX_LAGS = 12


@dataclass(frozen=True)
class UnitRootResult:
    statistic: float
    p_value: float
    lags: int
    n_obs: int
    test: str

    def passes(self, significance=0.10):
        return self.p_value < significance


def _design(y, lags, start, level_fn):
    """Regressand and design for ``dy_t = b * f(y_{t-1}) + sum g_i dy_{t-i}``.

    ``start`` is the first usable index into ``dy`` (>= lags) so that
    different lag orders can share a common sample.
    """
    dy = np.diff(y)
    endog = dy[start:]
    cols = [level_fn(y[start:-1])]
    for i in range(1, lags + 1):
        cols.append(dy[start - i : dy.size - i])
    return endog, np.column_stack(cols)


def _ols(endog, exog):
    coef, _, rank, _ = np.linalg.lstsq(exog, endog, rcond=None)
    if rank < exog.shape[1]:
        raise SingularDesign("collinear regressors in unit-root regression")
    resid = endog - exog @ coef
    rss = float(resid @ resid)
    return coef, rss


def _t_ratio(endog, exog):
    n, k = exog.shape
    coef, rss = _ols(endog, exog)
    if rss <= 0.0 or n <= k:
        raise SingularDesign("perfect fit: residual variance is zero")
    sigma2 = rss / (n - k)
    xtx_inv = np.linalg.inv(exog.T @ exog)
    se = np.sqrt(sigma2 * xtx_inv[0, 0])
    return float(coef[0] / se)


def _aic(endog, exog):
    n, k = exog.shape
    _, rss = _ols(endog, exog)
    if rss <= 0.0:
        raise SingularDesign("perfect fit: residual variance is zero")
    return n * np.log(rss / n) + 2.0 * k


def _unit_root(series, max_lags, level_fn, test):
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if max_lags < 0:
        raise ValueError("max_lags must be non-negative")
    if not np.all(np.isfinite(y)):
        raise NonFiniteSpread("series contains non-finite values")
    if y.size < max_lags + 10:
        raise TooShort(f"need at least {max_lags + 10} observations, got {y.size}")
    if np.ptp(y) == 0.0:
        raise SingularDesign("series is constant")

    # lag order by AIC on the common sample, then refit on the longest sample
    best_lag, best_aic = 0, np.inf
    for p in range(max_lags + 1):
        endog, exog = _design(y, p, max_lags, level_fn)
        aic = _aic(endog, exog)
        if aic < best_aic - 1e-12:
            best_lag, best_aic = p, aic
    endog, exog = _design(y, best_lag, best_lag, level_fn)
    stat = _t_ratio(endog, exog)
    n_obs = endog.size
    return UnitRootResult(
        statistic=stat,
        p_value=p_value(test, stat, n_obs),
        lags=best_lag,
        n_obs=n_obs,
        test=test,
    )


def adf_test(series, max_lags=DEFAULT_MAX_LAGS):
    """Augmented Dickey-Fuller test without constant or trend.

    Fits ``dS_t = rho S_{t-1} + sum_i g_i dS_{t-i} + e_t`` with the lag order
    chosen by AIC over ``0..max_lags``; the statistic is the t-ratio of rho.
    """
    return _unit_root(series, max_lags, lambda level: level, "ADF_nc")


def kss_test(series, max_lags=DEFAULT_MAX_LAGS):
    """KSS nonlinear unit-root test on the raw (undemeaned) series.

    Fits ``dS_t = delta S_{t-1}^3 + sum_i g_i dS_{t-i} + e_t``; one-sided,
    rejecting for large negative t-ratios of delta.
    """
    return _unit_root(series, max_lags, lambda level: level**3, "KSS_raw")
