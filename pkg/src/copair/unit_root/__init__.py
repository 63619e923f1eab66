"""Spread construction and unit-root screening (ADF and KSS)."""

from .spread import SpreadSeries, make_spread, ols_beta_no_intercept
from .tables import TESTS, critical_values, generate_tables, load_tables, p_value, write_tables
from .tests import DEFAULT_MAX_LAGS, UnitRootResult, adf_test, kss_test

__all__ = [
    "DEFAULT_MAX_LAGS",
    "TESTS",
    "SpreadSeries",
    "UnitRootResult",
    "adf_test",
    "critical_values",
    "generate_tables",
    "kss_test",
    "load_tables",
    "make_spread",
    "ols_beta_no_intercept",
    "p_value",
    "write_tables",
]
