"""Copula-based pairs trading on reference-asset spreads.

Subpackages and modules:

- ``market_data``: candle ingestion, alignment and rolling cycle windows
- ``unit_root``: spreads, ADF and KSS tests with Monte Carlo critical values
- ``dependence``: Kendall's tau and empirical-CDF pseudo-observations
- ``copula``: twelve bivariate families, rotations, fitting and selection
- ``strategy``: pair formation and the h-function signal engine
- ``backtest``: execution, accounting, metrics and reports
"""

__version__ = "0.1.0"
