"""No-intercept hedge ratios and reference spreads."""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DegenerateRegressor, LengthMismatch, UnknownSymbol


@dataclass(frozen=True, eq=False)
class SpreadSeries:
    """Spread ``S_t = ref_t - beta * alt_t`` over one window."""

    alt_symbol: str
    beta: float
    values: np.ndarray
    timestamps: np.ndarray

    def __post_init__(self):
        if not np.isfinite(self.beta):
            raise DegenerateRegressor(f"non-finite beta for {self.alt_symbol}")
        if len(self.values) != len(self.timestamps):
            raise LengthMismatch("spread values and timestamps differ in length")

    def __len__(self):
        return len(self.values)


def ols_beta_no_intercept(y, x):
    """Least-squares slope of ``y`` on ``x`` without intercept, ``sum(xy) / sum(x^2)``."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != x.shape or y.ndim != 1:
        raise LengthMismatch(f"y and x must be 1-d of equal length, got {y.shape} and {x.shape}")
    if y.size < 2:
        raise ValueError("need at least two observations")
    sxx = float(x @ x)
    if sxx == 0.0:
        raise DegenerateRegressor("regressor is identically zero")
    return float(x @ y) / sxx


def make_spread(panel_window, alt_symbol):
    """Spread of the panel's reference symbol against ``alt_symbol``."""
    if alt_symbol not in panel_window.symbols:
        raise UnknownSymbol(alt_symbol)
    ref = panel_window.close(panel_window.reference_symbol)
    alt = panel_window.close(alt_symbol)
    beta = ols_beta_no_intercept(ref, alt)
    return SpreadSeries(alt_symbol, beta, ref - beta * alt, panel_window.timestamps)
