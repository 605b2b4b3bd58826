"""Truncated power-series (Taylor-mode) arithmetic.

A jet stores the Taylor coefficients c[0..K] of a function at a point, so
c[j] = f^(j)(x0)/j!.  Arithmetic on jets propagates derivatives exactly (to
rounding), which is what the profile/Liouville machinery needs for derivative
orders where finite differences would lose most digits.

Coefficients may carry trailing array axes, so a single jet can hold the
expansions at a whole grid of points at once.
"""

from __future__ import annotations

import numpy as np

_FACTORIALS = [1.0]
while len(_FACTORIALS) < 40:
    _FACTORIALS.append(_FACTORIALS[-1] * len(_FACTORIALS))


class Jet:
    """Taylor coefficients c[j], j = 0..order, with optional trailing axes."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def variable(x0, order):
        """Jet of the identity function at x0."""
        x0 = np.asarray(x0, dtype=float)
        c = np.zeros((order + 1,) + x0.shape)
        c[0] = x0
        if order >= 1:
            c[1] = 1.0
        return Jet(c)

    @staticmethod
    def constant(value, order, shape=()):
        value = np.asarray(value)
        c = np.zeros((order + 1,) + np.broadcast_shapes(value.shape, shape),
                     dtype=value.dtype)
        c[0] = value
        return Jet(c)

    # -- basic queries -------------------------------------------------------

    @property
    def order(self):
        return self.c.shape[0] - 1

    @property
    def value(self):
        return self.c[0]

    def derivative_values(self, up_to=None):
        """Return [f, f', f'', ...] (plain derivatives, not Taylor coeffs)."""
        m = self.order if up_to is None else up_to
        return np.stack([self.c[j] * _FACTORIALS[j] for j in range(m + 1)])

    def truncated(self, order):
        return Jet(self.c[: order + 1])

    def shift(self):
        """Jet of the derivative f' (one order shorter)."""
        k = np.arange(1, self.c.shape[0]).reshape((-1,) + (1,) * (self.c.ndim - 1))
        return Jet(self.c[1:] * k)

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            K = min(self.order, other.order)
            return Jet(self.c[: K + 1] + other.c[: K + 1])
        c = self.c.copy()
        c = c.astype(np.result_type(c.dtype, np.asarray(other).dtype))
        c[0] = c[0] + other
        return Jet(c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -np.asarray(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * np.asarray(other))
        K = min(self.order, other.order)
        a, b = self.c[: K + 1], other.c[: K + 1]
        out = np.zeros((K + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]),
                       dtype=np.result_type(a.dtype, b.dtype))
        for k in range(K + 1):
            for j in range(k + 1):
                out[k] += a[j] * b[k - j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / np.asarray(other))
        K = min(self.order, other.order)
        a, b = self.c[: K + 1], other.c[: K + 1]
        out = np.zeros((K + 1,) + np.broadcast_shapes(a.shape[1:], b.shape[1:]),
                       dtype=np.result_type(a.dtype, b.dtype))
        for k in range(K + 1):
            acc = a[k] + np.zeros(out.shape[1:], dtype=out.dtype)
            for j in range(k):
                acc = acc - out[j] * b[k - j]
            out[k] = acc / b[0]
        return Jet(out)

    def __rtruediv__(self, other):
        return Jet.constant(np.asarray(other), self.order, self.c.shape[1:]) / self

    # -- elementary functions --------------------------------------------------

    def exp(self):
        K = self.order
        u = self.c
        out = np.zeros_like(u, dtype=np.result_type(u.dtype, float))
        out[0] = np.exp(u[0])
        for k in range(1, K + 1):
            acc = np.zeros(out.shape[1:], dtype=out.dtype)
            for j in range(1, k + 1):
                acc = acc + j * u[j] * out[k - j]
            out[k] = acc / k
        return Jet(out)

    def log(self):
        K = self.order
        u = self.c
        out = np.zeros_like(u, dtype=np.result_type(u.dtype, float))
        out[0] = np.log(u[0])
        for k in range(1, K + 1):
            acc = k * u[k].astype(out.dtype)
            for j in range(1, k):
                acc = acc - j * out[j] * u[k - j]
            out[k] = acc / (k * u[0])
        return Jet(out)

    def pow(self, a):
        """self**a for a real (possibly non-integer) exponent; u[0] > 0 assumed."""
        K = self.order
        u = self.c
        out = np.zeros_like(u, dtype=np.result_type(u.dtype, float))
        out[0] = u[0] ** a
        for k in range(1, K + 1):
            acc = np.zeros(out.shape[1:], dtype=out.dtype)
            for j in range(1, k + 1):
                acc = acc + (a * j - (k - j)) * u[j] * out[k - j]
            out[k] = acc / (k * u[0])
        return Jet(out)

    def sqrt(self):
        return self.pow(0.5)

    def _circular(self, f0, g0, sign):
        # joint recurrence for (sin,cos) [sign=-1] or (sinh,cosh) [sign=+1]
        K = self.order
        u = self.c
        s = np.zeros_like(u, dtype=np.result_type(u.dtype, float))
        c = np.zeros_like(s)
        s[0], c[0] = f0(u[0]), g0(u[0])
        for k in range(1, K + 1):
            sa = np.zeros(s.shape[1:], dtype=s.dtype)
            ca = np.zeros(s.shape[1:], dtype=s.dtype)
            for j in range(1, k + 1):
                sa = sa + j * u[j] * c[k - j]
                ca = ca + j * u[j] * s[k - j]
            s[k] = sa / k
            c[k] = sign * ca / k
        return Jet(s), Jet(c)

    def sincos(self):
        return self._circular(np.sin, np.cos, -1.0)

    def sinhcosh(self):
        return self._circular(np.sinh, np.cosh, +1.0)

    def cosh(self):
        return self.sinhcosh()[1]

    def compose(self, outer_coeffs):
        """Evaluate sum_j outer_coeffs[j] * (self - self[0])**j as a jet.

        outer_coeffs must be the Taylor coefficients of the outer function at
        the point self.value.
        """
        K = self.order
        d = Jet(self.c.copy())
        d.c[0] = np.zeros_like(d.c[0])
        g = list(outer_coeffs)
        out = Jet.constant(np.asarray(g[-1]), K, self.c.shape[1:])
        for j in range(len(g) - 2, -1, -1):
            out = out * d + g[j]
        return out


def solve_autonomous_ode(jet_of_rate, x0, y0, order):
    """Jet of y(x) at x0 where y' = u(y), given u as a callable y-jet -> y-jet.

    `jet_of_rate(yjet)` must return the jet of u along y; used to build the
    Taylor coefficients of the solution one order at a time.
    """
    y0 = np.asarray(y0, dtype=float)
    c = np.zeros((order + 1,) + y0.shape)
    c[0] = y0
    for k in range(order):
        rate = jet_of_rate(Jet(c[: k + 1]))
        c[k + 1] = rate.c[k] / (k + 1)
    return Jet(c)
