"""Unrotated bivariate copula families.

Each family works on arrays ``u, v`` strictly inside the unit square and a
parameter tuple. ``h2g1(u, v)`` is ``dC/du = P(V <= v | U = u)`` and
``h1g2(u, v)`` is ``dC/dv = P(U <= u | V = v)``. Boundary handling,
rotations and argument validation live in :mod:`copair.copula.core`.
"""

from enum import Enum

import numpy as np
from scipy import special, stats

from ._elliptical import bvn_cdf, gaussian_h, student_copula_cdf, student_h, t_quantile
from ._jet import Jet, exp, expm1, log, log1p


class CopulaFamily(str, Enum):
    GAUSSIAN = "Gaussian"
    STUDENT_T = "StudentT"
    CLAYTON = "Clayton"
    GUMBEL = "Gumbel"
    FRANK = "Frank"
    JOE = "Joe"
    BB1 = "BB1"
    BB6 = "BB6"
    BB7 = "BB7"
    BB8 = "BB8"
    TAWN1 = "Tawn1"
    TAWN2 = "Tawn2"

    @property
    def order(self):
        return list(CopulaFamily).index(self)


class Family:
    name = None
    param_names = ()
    # box used by the optimizer; admissibility is checked by ``check``
    bounds = ()
    radially_symmetric = False
    exchangeable = True

    @property
    def n_params(self):
        return len(self.param_names)

    def check(self, par):
        """Return an error message if ``par`` is inadmissible, else None."""
        raise NotImplementedError

    def start_grid(self):
        """Fixed starting points for the multi-start likelihood search."""
        axes = [np.asarray(a, float) for a in self.grid_axes()]
        mesh = np.meshgrid(*axes, indexing="ij")
        return [tuple(float(m.flat[i]) for m in mesh) for i in range(mesh[0].size)]

    def grid_axes(self):
        raise NotImplementedError

    def cdf(self, u, v, par):
        raise NotImplementedError

    def h2g1(self, u, v, par):
        raise NotImplementedError

    def h1g2(self, u, v, par):
        if self.exchangeable:
            return self.h2g1(v, u, par)
        raise NotImplementedError

    def logpdf(self, u, v, par):
        raise NotImplementedError

    def pdf(self, u, v, par):
        return np.exp(self.logpdf(u, v, par))


def _geom(lo, hi, n):
    return np.geomspace(lo, hi, n)


class Gaussian(Family):
    name = CopulaFamily.GAUSSIAN
    param_names = ("rho",)
    bounds = ((-0.999, 0.999),)
    radially_symmetric = True

    def check(self, par):
        (rho,) = par
        if not -1.0 < rho < 1.0:
            return "Gaussian requires -1 < rho < 1"

    def grid_axes(self):
        return [np.linspace(-0.9, 0.9, 7)]

    def cdf(self, u, v, par):
        return bvn_cdf(special.ndtri(u), special.ndtri(v), par[0])

    def h2g1(self, u, v, par):
        return gaussian_h(u, v, par[0])

    def logpdf(self, u, v, par):
        rho = par[0]
        x = special.ndtri(u)
        y = special.ndtri(v)
        one_m = (1.0 - rho) * (1.0 + rho)
        return -0.5 * np.log(one_m) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_m)


class StudentT(Family):
    name = CopulaFamily.STUDENT_T
    param_names = ("rho", "nu")
    bounds = ((-0.999, 0.999), (2.05, 30.0))
    radially_symmetric = True

    def check(self, par):
        rho, nu = par
        if not -1.0 < rho < 1.0:
            return "StudentT requires -1 < rho < 1"
        if not 2.0 < nu < np.inf:
            return "StudentT requires nu > 2"

    def grid_axes(self):
        return [np.linspace(-0.8, 0.8, 5), _geom(2.5, 30.0, 5)]

    def cdf(self, u, v, par):
        return student_copula_cdf(u, v, par[0], par[1])

    def h2g1(self, u, v, par):
        return student_h(u, v, par[0], par[1])

    def logpdf(self, u, v, par):
        rho, nu = par
        return self.logpdf_quantiles(t_quantile(nu, u), t_quantile(nu, v), rho, nu)

    @staticmethod
    def logpdf_quantiles(x, y, rho, nu):
        """Log density given the t quantiles ``x, y`` of the arguments."""
        one_m = (1.0 - rho) * (1.0 + rho)
        quad = (x * x - 2.0 * rho * x * y + y * y) / (nu * one_m)
        log_joint = (
            special.gammaln(0.5 * (nu + 2.0))
            - special.gammaln(0.5 * nu)
            - np.log(nu * np.pi)
            - 0.5 * np.log(one_m)
            - 0.5 * (nu + 2.0) * np.log1p(quad)
        )
        return log_joint - stats.t.logpdf(x, nu) - stats.t.logpdf(y, nu)


class Clayton(Family):
    name = CopulaFamily.CLAYTON
    param_names = ("theta",)
    bounds = ((1e-4, 30.0),)

    def check(self, par):
        if not 0.0 < par[0] < np.inf:
            return "Clayton requires theta > 0"

    def grid_axes(self):
        return [_geom(0.05, 20.0, 7)]

    @staticmethod
    def _a(u, v, theta):
        # u^-theta + v^-theta - 1
        return np.expm1(-theta * np.log(u)) + np.expm1(-theta * np.log(v)) + 1.0

    def cdf(self, u, v, par):
        theta = par[0]
        return np.exp(-np.log(self._a(u, v, theta)) / theta)

    def h2g1(self, u, v, par):
        theta = par[0]
        a = self._a(u, v, theta)
        return np.exp(-(theta + 1.0) * np.log(u) - (1.0 / theta + 1.0) * np.log(a))

    def logpdf(self, u, v, par):
        theta = par[0]
        a = self._a(u, v, theta)
        return (
            np.log1p(theta)
            - (1.0 + theta) * (np.log(u) + np.log(v))
            - (2.0 + 1.0 / theta) * np.log(a)
        )


class Gumbel(Family):
    name = CopulaFamily.GUMBEL
    param_names = ("theta",)
    bounds = ((1.0, 30.0),)

    def check(self, par):
        if not 1.0 <= par[0] < np.inf:
            return "Gumbel requires theta >= 1"

    def grid_axes(self):
        return [_geom(1.05, 15.0, 7)]

    @staticmethod
    def _parts(u, v, theta):
        x = -np.log(u)
        y = -np.log(v)
        w = (x**theta + y**theta) ** (1.0 / theta)
        return x, y, w

    def cdf(self, u, v, par):
        _, _, w = self._parts(u, v, par[0])
        return np.exp(-w)

    def h2g1(self, u, v, par):
        theta = par[0]
        x, _, w = self._parts(u, v, theta)
        return np.exp(-w + (1.0 - theta) * np.log(w) + (theta - 1.0) * np.log(x) - np.log(u))

    def logpdf(self, u, v, par):
        theta = par[0]
        x, y, w = self._parts(u, v, theta)
        return (
            -w
            - np.log(u)
            - np.log(v)
            + (theta - 1.0) * (np.log(x) + np.log(y))
            + (1.0 - 2.0 * theta) * np.log(w)
            + np.log(w + theta - 1.0)
        )


class Frank(Family):
    name = CopulaFamily.FRANK
    param_names = ("theta",)
    bounds = ((-40.0, 40.0),)
    radially_symmetric = True

    def check(self, par):
        theta = par[0]
        if theta == 0.0 or not np.isfinite(theta):
            return "Frank requires a finite theta != 0"

    def grid_axes(self):
        return [np.array([-20.0, -5.0, -1.0, 1.0, 5.0, 20.0])]

    # Above this |theta| the expm1 forms cancel; the log-sum forms below are
    # used instead, with negative theta reduced by C_{-t}(u, v) = u - C_t(u, 1 - v).
    _LARGE = 1.0

    @staticmethod
    def _log_n(u, v, t):
        # log(e^{-tu} + e^{-tv} - e^{-t(u+v)} - e^{-t}) for t > 0, all terms positive
        return np.logaddexp(
            -t * u + np.log(-np.expm1(-t * (1.0 - u))),
            -t * v + np.log(-np.expm1(-t * u)),
        )

    def cdf(self, u, v, par):
        theta = par[0]
        if abs(theta) < self._LARGE:
            num = np.expm1(-theta * u) * np.expm1(-theta * v)
            return -np.log1p(num / np.expm1(-theta)) / theta
        if theta < 0:
            return u - self.cdf(u, 1.0 - v, (-theta,))
        return -(self._log_n(u, v, theta) - np.log(-np.expm1(-theta))) / theta

    def h2g1(self, u, v, par):
        theta = par[0]
        if abs(theta) < self._LARGE:
            eu = np.expm1(-theta * u)
            ev = np.expm1(-theta * v)
            return (eu + 1.0) * ev / (np.expm1(-theta) + eu * ev)
        if theta < 0:
            return 1.0 - self.h2g1(u, 1.0 - v, (-theta,))
        return np.exp(-theta * u + np.log(-np.expm1(-theta * v)) - self._log_n(u, v, theta))

    def logpdf(self, u, v, par):
        theta = par[0]
        if abs(theta) < self._LARGE:
            eu = np.expm1(-theta * u)
            ev = np.expm1(-theta * v)
            em = np.expm1(-theta)
            return (
                np.log(-theta * em)
                - theta * (u + v)
                - 2.0 * np.log(np.abs(em + eu * ev))
            )
        if theta < 0:
            return self.logpdf(u, 1.0 - v, (-theta,))
        return (
            np.log(theta)
            + np.log(-np.expm1(-theta))
            - theta * (u + v)
            - 2.0 * self._log_n(u, v, theta)
        )


class Joe(Family):
    name = CopulaFamily.JOE
    param_names = ("theta",)
    bounds = ((1.0, 30.0),)

    def check(self, par):
        if not 1.0 <= par[0] < np.inf:
            return "Joe requires theta >= 1"

    def grid_axes(self):
        return [_geom(1.05, 15.0, 7)]

    @staticmethod
    def _parts(u, v, theta):
        a = np.exp(theta * np.log1p(-u))
        b = np.exp(theta * np.log1p(-v))
        return a, b, a + b - a * b

    def cdf(self, u, v, par):
        theta = par[0]
        _, _, s = self._parts(u, v, theta)
        return -np.expm1(np.log(s) / theta)

    def h2g1(self, u, v, par):
        theta = par[0]
        _, b, s = self._parts(u, v, theta)
        return np.exp((theta - 1.0) * np.log1p(-u) + np.log1p(-b) + (1.0 / theta - 1.0) * np.log(s))

    def logpdf(self, u, v, par):
        theta = par[0]
        _, _, s = self._parts(u, v, theta)
        return (
            (1.0 / theta - 2.0) * np.log(s)
            + (theta - 1.0) * (np.log1p(-u) + np.log1p(-v))
            + np.log(theta - 1.0 + s)
        )


class Archimedean(Family):
    """Two-parameter Archimedean families defined through their generator.

    ``phi`` is the generator and ``psi`` its inverse; both accept a
    :class:`Jet` so that derivatives come out exact.
    """

    def phi(self, t, par):
        raise NotImplementedError

    def psi(self, s, par):
        raise NotImplementedError

    def _terms(self, u, v, par):
        pu = self.phi(Jet.variable(u), par)
        pv = self.phi(Jet.variable(v), par)
        s = pu.v + pv.v
        return pu, pv, self.psi(Jet.variable(s), par)

    def cdf(self, u, v, par):
        s = self.phi(np.asarray(u, float), par) + self.phi(np.asarray(v, float), par)
        return self.psi(s, par)

    def h2g1(self, u, v, par):
        pu, _, ps = self._terms(u, v, par)
        return ps.d1 * pu.d1

    def logpdf(self, u, v, par):
        pu, pv, ps = self._terms(u, v, par)
        return np.log(ps.d2) + np.log(-pu.d1) + np.log(-pv.d1)


def _log_one_minus_pow(t, theta):
    # log(1 - (1 - t)^theta), keeping (1 - t)^theta below machine epsilon
    return log1p(-exp(theta * log1p(-t)))


def _root_complement(y, theta):
    # 1 - y^(1/theta)
    return -expm1(log(y) / theta)


class BB1(Archimedean):
    name = CopulaFamily.BB1
    param_names = ("theta", "delta")
    bounds = ((1e-4, 15.0), (1.0, 10.0))

    def check(self, par):
        theta, delta = par
        if not 0.0 < theta < np.inf:
            return "BB1 requires theta > 0"
        if not 1.0 <= delta < np.inf:
            return "BB1 requires delta >= 1"

    def grid_axes(self):
        return [_geom(0.1, 5.0, 5), _geom(1.05, 5.0, 5)]

    def phi(self, t, par):
        theta, delta = par
        return expm1(-theta * log(t)) ** delta

    def psi(self, s, par):
        theta, delta = par
        return (1.0 + s ** (1.0 / delta)) ** (-1.0 / theta)


class BB6(Archimedean):
    name = CopulaFamily.BB6
    param_names = ("theta", "delta")
    bounds = ((1.0, 10.0), (1.0, 10.0))

    def check(self, par):
        theta, delta = par
        if not 1.0 <= theta < np.inf:
            return "BB6 requires theta >= 1"
        if not 1.0 <= delta < np.inf:
            return "BB6 requires delta >= 1"

    def grid_axes(self):
        return [_geom(1.05, 5.0, 5), _geom(1.05, 5.0, 5)]

    def phi(self, t, par):
        theta, delta = par
        return (-_log_one_minus_pow(t, theta)) ** delta

    def psi(self, s, par):
        theta, delta = par
        return _root_complement(-expm1(-(s ** (1.0 / delta))), theta)

    # The generator x^delta, x = -log(1 - (1 - t)^theta), underflows near
    # (1, 1); cdf, h and density below work with log x and log w instead,
    # where w = (x^delta + y^delta)^(1/delta).
    @staticmethod
    def _log_x(t, theta):
        la = theta * np.log1p(-t)
        a = np.exp(la)
        ratio = np.where(a > 0.0, -np.log1p(-a) / np.where(a > 0.0, a, 1.0), 1.0)
        return la + np.log(ratio)

    def _log_w(self, u, v, par):
        theta, delta = par
        lx = self._log_x(u, theta)
        ly = self._log_x(v, theta)
        return lx, ly, np.logaddexp(delta * lx, delta * ly) / delta

    def cdf(self, u, v, par):
        theta, _ = par
        _, _, lw = self._log_w(u, v, par)
        return -np.expm1(np.log(-np.expm1(-np.exp(lw))) / theta)

    def h2g1(self, u, v, par):
        theta, delta = par
        lx, _, lw = self._log_w(u, v, par)
        w = np.exp(lw)
        return np.exp(
            -w + (1.0 / theta - 1.0) * np.log(-np.expm1(-w)) + (1.0 - delta) * lw
            + (delta - 1.0) * lx + (theta - 1.0) * np.log1p(-u) + np.exp(lx)
        )

    def logpdf(self, u, v, par):
        theta, delta = par
        lx, ly, lw = self._log_w(u, v, par)
        w = np.exp(lw)
        bracket = 1.0 + (1.0 - 1.0 / theta) / np.expm1(w) + (delta - 1.0) * np.exp(-lw)
        return (
            np.log(theta) - w + (1.0 / theta - 1.0) * np.log(-np.expm1(-w)) + 2.0 * (1.0 - delta) * lw
            + np.log(bracket) + (delta - 1.0) * (lx + ly)
            + (theta - 1.0) * (np.log1p(-u) + np.log1p(-v)) + np.exp(lx) + np.exp(ly)
        )


class BB7(Archimedean):
    name = CopulaFamily.BB7
    param_names = ("theta", "delta")
    bounds = ((1.0, 10.0), (1e-4, 15.0))

    def check(self, par):
        theta, delta = par
        if not 1.0 <= theta < np.inf:
            return "BB7 requires theta >= 1"
        if not 0.0 < delta < np.inf:
            return "BB7 requires delta > 0"

    def grid_axes(self):
        return [_geom(1.05, 5.0, 5), _geom(0.1, 5.0, 5)]

    def phi(self, t, par):
        theta, delta = par
        return expm1(-delta * _log_one_minus_pow(t, theta))

    def psi(self, s, par):
        theta, delta = par
        return _root_complement(-expm1(-log1p(s) / delta), theta)


class BB8(Archimedean):
    name = CopulaFamily.BB8
    param_names = ("theta", "delta")
    bounds = ((1.0, 15.0), (1e-4, 1.0))

    def check(self, par):
        theta, delta = par
        if not 1.0 <= theta < np.inf:
            return "BB8 requires theta >= 1"
        if not 0.0 < delta <= 1.0:
            return "BB8 requires 0 < delta <= 1"

    def grid_axes(self):
        return [_geom(1.05, 8.0, 5), np.linspace(0.2, 1.0, 5)]

    @staticmethod
    def _eta(theta, delta):
        return -np.expm1(theta * np.log1p(-delta)) if delta < 1.0 else 1.0

    def phi(self, t, par):
        theta, delta = par
        return np.log(self._eta(theta, delta)) - _log_one_minus_pow(delta * t, theta)

    def psi(self, s, par):
        theta, delta = par
        eta = self._eta(theta, delta)
        return _root_complement(-expm1(np.log(eta) - s), theta) / delta


class ExtremeValue(Family):
    """Extreme-value copulas ``C(u, v) = (uv)^A(ln v / ln uv)``."""

    exchangeable = False

    def pickands(self, t, par):
        raise NotImplementedError

    def pickands_terms(self, t, par):
        """``A``, ``A - t A'``, ``A + (1 - t) A'`` and ``A''`` at ``t``."""
        a = self.pickands(Jet.variable(t), par)
        return a.v, a.v - t * a.d1, a.v + (1.0 - t) * a.d1, a.d2

    def _parts(self, u, v, par):
        x = -np.log(u)
        y = -np.log(v)
        total = x + y
        t = y / total
        a, lx, ly, d2 = self.pickands_terms(t, par)
        return total, t, lx, ly, d2, np.exp(-total * a)

    def cdf(self, u, v, par):
        x = -np.log(u)
        y = -np.log(v)
        total = x + y
        return np.exp(-total * self.pickands(y / total, par))

    def h2g1(self, u, v, par):
        *_, lx, _, _, c = self._parts(u, v, par)
        return c * lx / u

    def h1g2(self, u, v, par):
        *_, ly, _, c = self._parts(u, v, par)
        return c * ly / v

    def logpdf(self, u, v, par):
        total, t, lx, ly, d2, c = self._parts(u, v, par)
        return np.log(c) - np.log(u) - np.log(v) + np.log(lx * ly + d2 * t * (1.0 - t) / total)


def tawn_pickands(t, theta, alpha, beta):
    """Three-parameter Tawn dependence function.

    ``A(t) = (1 - alpha)(1 - t) + (1 - beta) t
    + [(alpha (1 - t))^theta + (beta t)^theta]^(1/theta)``, which meets
    ``A(0) = A(1) = 1`` for every ``alpha, beta`` in [0, 1].
    """
    s = 1.0 - t
    bracket = alpha**theta * s**theta + beta**theta * t**theta
    return (1.0 - alpha) * s + (1.0 - beta) * t + bracket ** (1.0 / theta)


class _Tawn(ExtremeValue):
    param_names = ("theta", "psi")
    bounds = ((1.0, 20.0), (0.0, 1.0))

    def check(self, par):
        theta, psi = par
        if not 1.0 <= theta < np.inf:
            return f"{self.name.value} requires theta >= 1"
        if not 0.0 <= psi <= 1.0:
            return f"{self.name.value} requires 0 <= psi <= 1"

    def grid_axes(self):
        return [_geom(1.2, 10.0, 5), np.linspace(0.1, 0.9, 5)]

    def _weights(self, psi):
        raise NotImplementedError

    def pickands(self, t, par):
        theta, psi = par
        alpha, beta = self._weights(psi)
        return tawn_pickands(t, theta, alpha, beta)

    def pickands_terms(self, t, par):
        # With B = [(alpha s)^theta + (beta t)^theta]^(1/theta), s = 1 - t, the
        # partial terms reduce to forms free of the cancellation in A + s A'
        theta, psi = par
        alpha, beta = self._weights(psi)
        s = 1.0 - t
        b = (alpha**theta * s**theta + beta**theta * t**theta) ** (1.0 / theta)
        ra = alpha * s / b
        rb = beta * t / b
        a = (1.0 - alpha) * s + (1.0 - beta) * t + b
        lx = (1.0 - alpha) + alpha * ra ** (theta - 1.0)
        ly = (1.0 - beta) + beta * rb ** (theta - 1.0)
        d2 = (theta - 1.0) * b * ra**theta * rb**theta / (s * t) ** 2
        return a, lx, ly, d2


class Tawn1(_Tawn):
    name = CopulaFamily.TAWN1

    def _weights(self, psi):
        return psi, 1.0


class Tawn2(_Tawn):
    name = CopulaFamily.TAWN2

    def _weights(self, psi):
        return 1.0, psi


FAMILIES = {
    cls.name: cls()
    for cls in (Gaussian, StudentT, Clayton, Gumbel, Frank, Joe, BB1, BB6, BB7, BB8, Tawn1, Tawn2)
}


def get_family(family):
    return FAMILIES[CopulaFamily(family)]
