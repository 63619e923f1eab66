"""Canonical maximum likelihood fitting and AIC model selection."""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ..exceptions import AllFitsFailed, FitFailed, InadmissibleParams, InvalidRotation
from ._elliptical import t_quantile
from .core import EPS, ROTATIONS, CopulaParams, _reflect, copula_cdf, copula_logpdf, h_function, implied_tau
from .families import FAMILIES, CopulaFamily, get_family

logger = logging.getLogger(__name__)

MIN_OBS = 50
_PENALTY = 1e300
# local refinement is run from this many of the best grid points
_N_LOCAL_STARTS = 3


@dataclass(frozen=True)
class FittedCopula:
    params: CopulaParams
    loglik: float
    n_obs: int

    @property
    def k(self):
        return self.params.n_params

    @property
    def aic(self):
        return 2.0 * self.k - 2.0 * self.loglik

    @property
    def family(self):
        return self.params.family

    @property
    def rotation(self):
        return self.params.rotation

    def implied_tau(self):
        return implied_tau(self.params)

    def as_record(self):
        return {
            "family": self.family.value,
            "rotation": self.rotation,
            "params": self.params.as_dict(),
            "loglik": self.loglik,
            "aic": self.aic,
            "n": self.n_obs,
        }

    def sort_key(self):
        return (self.aic, self.k, self.family.order, self.rotation)


def _pseudo_arrays(pseudo):
    if hasattr(pseudo, "u1"):
        u, v = np.asarray(pseudo.u1, float), np.asarray(pseudo.u2, float)
    else:
        arr = check_array(pseudo, dtype=float)
        if arr.shape[1] != 2:
            raise ValueError(f"expected two columns of pseudo-observations, got {arr.shape[1]}")
        u, v = arr[:, 0], arr[:, 1]
    return u, v


def fit_cml(family, rotation, pseudo):
    """Fit one family/rotation by canonical maximum likelihood.

    The likelihood is evaluated on a fixed grid of starting points inside the
    admissible box; a bounded derivative-free local search then refines from
    the best grid points (Brent for one parameter, Nelder-Mead for two).
    """
    family = CopulaFamily(family)
    if rotation not in ROTATIONS:
        raise InvalidRotation(f"rotation must be one of {ROTATIONS}, got {rotation!r}")
    fam = get_family(family)
    u, v = _pseudo_arrays(pseudo)
    n = u.size
    if n < MIN_OBS:
        raise FitFailed(f"need at least {MIN_OBS} pseudo-observations, got {n}")
    if not (np.all((u > 0) & (u < 1)) and np.all((v > 0) & (v < 1))):
        raise FitFailed("pseudo-observations must lie in (0, 1)")
    ru, rv = _reflect(rotation, u, v)
    ru = np.clip(ru, EPS, 1.0 - EPS)
    rv = np.clip(rv, EPS, 1.0 - EPS)

    def nll(x):
        par = tuple(float(a) for a in x)
        if fam.check(par):
            return _PENALTY
        with np.errstate(all="ignore"):
            total = np.sum(fam.logpdf(ru, rv, par))
        return -total if np.isfinite(total) else _PENALTY

    if family is CopulaFamily.STUDENT_T:
        best_val, best_par = _fit_student(ru, rv)
        return _finish(family, rotation, best_val, best_par, n)

    grid = fam.start_grid()
    values = np.array([nll(g) for g in grid])
    if not np.any(values < _PENALTY):
        raise FitFailed(f"{family.value}/{rotation}: log-likelihood non-finite at every start")

    results = [(values[i], grid[i]) for i in range(len(grid))]
    if fam.n_params == 1:
        axis = sorted(g[0] for g in grid)
        best = float(grid[int(np.argmin(values))][0])
        i = axis.index(best)
        lo = axis[i - 1] if i > 0 else fam.bounds[0][0]
        hi = axis[i + 1] if i + 1 < len(axis) else fam.bounds[0][1]
        res = optimize.minimize_scalar(
            lambda t: nll((t,)), bounds=(lo, hi), method="bounded", options={"xatol": 1e-8}
        )
        results.append((float(res.fun), (float(res.x),)))
    else:
        order = np.argsort(values, kind="stable")[:_N_LOCAL_STARTS]
        for i in order:
            if values[i] >= _PENALTY:
                continue
            res = optimize.minimize(
                nll,
                np.asarray(grid[i]),
                method="Nelder-Mead",
                bounds=fam.bounds,
                options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000},
            )
            results.append((float(res.fun), tuple(float(a) for a in res.x)))

    results.sort(key=lambda r: r[0])
    best_val, best_par = results[0]
    return _finish(family, rotation, best_val, best_par, n)


def _finish(family, rotation, best_val, best_par, n):
    if not best_val < _PENALTY:
        raise FitFailed(f"{family.value}/{rotation}: optimizer found no finite likelihood")
    try:
        params = CopulaParams.from_vector(family, best_par, rotation)
    except InadmissibleParams as exc:
        raise FitFailed(str(exc)) from exc
    return FittedCopula(params=params, loglik=-best_val, n_obs=n)


def _fit_student(u, v):
    """Profile likelihood over nu: a log grid of nu, then Brent refinement.

    For each nu the quantiles are computed once and rho is maximised by a
    bounded scalar search.
    """
    fam = FAMILIES[CopulaFamily.STUDENT_T]
    (rlo, rhi), (nlo, nhi) = fam.bounds
    cache = {}

    def profile(log_nu):
        nu = float(np.exp(log_nu))
        x = t_quantile(nu, u)
        y = t_quantile(nu, v)

        def nll_rho(rho):
            with np.errstate(all="ignore"):
                total = np.sum(fam.logpdf_quantiles(x, y, rho, nu))
            return -total if np.isfinite(total) else _PENALTY

        starts = np.linspace(rlo, rhi, 9)
        vals = [nll_rho(r) for r in starts]
        i = int(np.argmin(vals))
        lo, hi = starts[max(i - 1, 0)], starts[min(i + 1, len(starts) - 1)]
        res = optimize.minimize_scalar(nll_rho, bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
        best = min((float(res.fun), float(res.x)), (vals[i], float(starts[i])))
        cache[log_nu] = best[1]
        return best[0]

    axis = np.linspace(np.log(nlo), np.log(nhi), 7)
    vals = [profile(a) for a in axis]
    i = int(np.argmin(vals))
    lo, hi = axis[max(i - 1, 0)], axis[min(i + 1, len(axis) - 1)]
    res = optimize.minimize_scalar(profile, bounds=(lo, hi), method="bounded", options={"xatol": 1e-8})
    options = [(vals[j], axis[j]) for j in range(len(axis))] + [(float(res.fun), float(res.x))]
    best_val, best_log_nu = min(options)
    return best_val, (cache[best_log_nu], float(np.clip(np.exp(best_log_nu), nlo, nhi)))


def candidate_specs(families=None, rotations=ROTATIONS):
    """(family, rotation) pairs to fit; radially symmetric families only at 0."""
    families = list(FAMILIES) if families is None else [CopulaFamily(f) for f in families]
    specs = []
    for fam in families:
        if FAMILIES[fam].radially_symmetric:
            specs.append((fam, 0))
        else:
            specs.extend((fam, r) for r in rotations)
    return specs


def select_model(pseudo, families=None, rotations=ROTATIONS, return_candidates=False):
    """Fit every candidate and return the one with minimal AIC.

    Ties are broken by fewer parameters, then family enumeration order, then
    rotation. Candidates whose fit fails are dropped.
    """
    specs = candidate_specs(families, rotations)
    if not specs:
        raise ValueError("empty candidate set")
    fitted = []
    for fam, rot in specs:
        try:
            fitted.append(fit_cml(fam, rot, pseudo))
        except FitFailed as exc:
            logger.debug("candidate dropped: %s", exc)
    if not fitted:
        raise AllFitsFailed("every copula candidate failed to fit")
    fitted.sort(key=FittedCopula.sort_key)
    return (fitted[0], fitted) if return_candidates else fitted[0]


class CopulaModel(BaseEstimator):
    """A single bivariate copula fitted by canonical maximum likelihood.

    Parameters
    ----------
    family : str
        One of the :class:`CopulaFamily` values.
    rotation : int
        0, 90, 180 or 270.

    Attributes
    ----------
    fitted_ : FittedCopula
    params_ : CopulaParams
    """

    def __init__(self, family="Gaussian", rotation=0):
        self.family = family
        self.rotation = rotation

    def fit(self, X, y=None):
        self.fitted_ = fit_cml(self.family, self.rotation, X)
        self.params_ = self.fitted_.params
        self.loglik_ = self.fitted_.loglik
        self.aic_ = self.fitted_.aic
        self.n_obs_ = self.fitted_.n_obs
        return self

    def _uv(self, X):
        check_is_fitted(self, "params_")
        return _pseudo_arrays(X)

    def cdf(self, X):
        u, v = self._uv(X)
        return copula_cdf(self.params_, u, v)

    def logpdf(self, X):
        u, v = self._uv(X)
        return copula_logpdf(self.params_, u, v)

    def pdf(self, X):
        return np.exp(self.logpdf(X))

    def h(self, X, target="1given2"):
        u, v = self._uv(X)
        return h_function(self.params_, target, u, v)

    def score(self, X, y=None):
        """Mean log-likelihood per observation."""
        return float(np.mean(self.logpdf(X)))


class CopulaSelector(BaseEstimator):
    """Fit all candidate families/rotations and keep the AIC-best one.

    Attributes
    ----------
    best_ : FittedCopula
    candidates_ : list of FittedCopula, sorted by AIC
    """

    def __init__(self, families=None, rotations=ROTATIONS):
        self.families = families
        self.rotations = rotations

    def fit(self, X, y=None):
        self.best_, self.candidates_ = select_model(
            X, self.families, self.rotations, return_candidates=True
        )
        self.params_ = self.best_.params
        return self

    def h(self, X, target="1given2"):
        check_is_fitted(self, "params_")
        return h_function(self.params_, target, *_pseudo_arrays(X))

    def score(self, X, y=None):
        check_is_fitted(self, "params_")
        return float(np.mean(copula_logpdf(self.params_, *_pseudo_arrays(X))))
