"""Second-order forward-mode differentiation for scalar generator functions.

A :class:`Jet` carries ``f(x)``, ``f'(x)`` and ``f''(x)`` through elementary
operations, which is all the Archimedean and extreme-value families need to
turn a generator (or Pickands function) into closed-form h-functions and
densities.
"""

import numpy as np


class Jet:
    __slots__ = ("v", "d1", "d2")

    def __init__(self, v, d1=0.0, d2=0.0):
        self.v = v
        self.d1 = d1
        self.d2 = d2

    @classmethod
    def variable(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x, np.ones_like(x), np.zeros_like(x))

    def _chain(self, f0, f1, f2):
        # (f o g)'' = f''(g) g'^2 + f'(g) g''
        return Jet(f0, f1 * self.d1, f2 * self.d1 * self.d1 + f1 * self.d2)

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.v + other.v, self.d1 + other.d1, self.d2 + other.d2)
        return Jet(self.v + other, self.d1, self.d2)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.d1, -self.d2)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet):
            return Jet(
                self.v * other.v,
                self.d1 * other.v + self.v * other.d1,
                self.d2 * other.v + 2.0 * self.d1 * other.d1 + self.v * other.d2,
            )
        return Jet(self.v * other, self.d1 * other, self.d2 * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.v / other, self.d1 / other, self.d2 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        inv = 1.0 / self.v
        return self._chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __pow__(self, p):
        if isinstance(p, Jet):
            raise TypeError("Jet exponents are not supported")
        f0 = self.v**p
        f1 = p * self.v ** (p - 1.0)
        f2 = p * (p - 1.0) * self.v ** (p - 2.0)
        return self._chain(f0, f1, f2)

    def exp(self):
        e = np.exp(self.v)
        return self._chain(e, e, e)

    def expm1(self):
        e = np.exp(self.v)
        return self._chain(np.expm1(self.v), e, e)

    def log(self):
        inv = 1.0 / self.v
        return self._chain(np.log(self.v), inv, -inv * inv)

    def log1p(self):
        inv = 1.0 / (1.0 + self.v)
        return self._chain(np.log1p(self.v), inv, -inv * inv)


def exp(x):
    return x.exp() if isinstance(x, Jet) else np.exp(x)


def expm1(x):
    return x.expm1() if isinstance(x, Jet) else np.expm1(x)


def log(x):
    return x.log() if isinstance(x, Jet) else np.log(x)


def log1p(x):
    return x.log1p() if isinstance(x, Jet) else np.log1p(x)
