"""Kendall's tau and empirical-CDF pseudo-observations."""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import LengthMismatch, NonFinite

# rows of the sign matrix processed at once in kendall_tau
_TAU_BLOCK = 256


def kendall_tau(x, y):
    """Kendall's tau-a, ``sum_{i<j} sgn(x_i - x_j) sgn(y_i - y_j) / C(n, 2)``.

    Tied pairs contribute zero; no tie correction is made to the denominator.
    The numerator is accumulated in integers, so the result is exact up to the
    final division.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"x and y must be 1-d of equal length, got {x.shape} and {y.shape}")
    n = x.size
    if n < 2:
        raise ValueError("need at least two observations")
    total = 0
    for start in range(0, n - 1, _TAU_BLOCK):
        stop = min(start + _TAU_BLOCK, n - 1)
        sx = np.sign(x[start:stop, None] - x[None, :]).astype(np.int8)
        sy = np.sign(y[start:stop, None] - y[None, :]).astype(np.int8)
        prod = (sx * sy).astype(np.int64)
        # keep only j > i
        cols = np.arange(n)
        rows = np.arange(start, stop)[:, None]
        total += int(prod[cols[None, :] > rows].sum())
    return total / (n * (n - 1) / 2)


@dataclass(frozen=True, eq=False)
class EmpiricalCdf:
    """Step function ``F(t) = #{X_i <= t} / n`` of a formation sample."""

    sorted_sample: np.ndarray

    def __post_init__(self):
        if self.sorted_sample.size < 2:
            raise ValueError("an empirical CDF needs at least two observations")

    @property
    def n(self):
        return self.sorted_sample.size

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        out = np.searchsorted(self.sorted_sample, t, side="right") / self.n
        return out if out.ndim else float(out)


def _finite(values, what):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{what} contains non-finite values")
    return arr


def ecdf_build(sample):
    sample = _finite(sample, "sample").ravel()
    return EmpiricalCdf(np.sort(sample))


def pit_transform(cdf, values):
    """Map values to ``(0, 1)`` through the formation ECDF.

    The ECDF is rescaled by ``n / (n + 1)`` and clamped to
    ``[1 / (n + 1), n / (n + 1)]`` so that no output touches the boundary.
    """
    values = _finite(values, "values")
    n = cdf.n
    raw = np.asarray(cdf.evaluate(values)) * (n / (n + 1.0))
    out = np.clip(raw, 1.0 / (n + 1.0), n / (n + 1.0))
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class PseudoObservations:
    u1: np.ndarray
    u2: np.ndarray

    def __post_init__(self):
        if self.u1.shape != self.u2.shape:
            raise LengthMismatch("u1 and u2 differ in length")
        for u in (self.u1, self.u2):
            if not np.all((u > 0.0) & (u < 1.0)):
                raise ValueError("pseudo-observations must lie in (0, 1)")

    @property
    def n(self):
        return self.u1.size

    def to_array(self):
        return np.column_stack([self.u1, self.u2])


class EmpiricalCdfTransformer(TransformerMixin, BaseEstimator):
    """Column-wise empirical-CDF probability integral transform.

    ``fit`` stores one ECDF per column of the formation data; ``transform``
    maps new rows onto ``(0, 1)`` with :func:`pit_transform`.

    Attributes
    ----------
    cdfs_ : list of EmpiricalCdf
    n_features_in_ : int
    """

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.cdfs_ = [ecdf_build(X[:, j]) for j in range(X.shape[1])]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "cdfs_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} columns, got {X.shape[1]}")
        return np.column_stack([pit_transform(c, X[:, j]) for j, c in enumerate(self.cdfs_)])

    def transform_pseudo(self, X):
        """Transform two columns into :class:`PseudoObservations`."""
        out = self.transform(X)
        if out.shape[1] != 2:
            raise ValueError("pseudo-observations need exactly two columns")
        return PseudoObservations(out[:, 0].copy(), out[:, 1].copy())
