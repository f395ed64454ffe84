"""Truncated Taylor-series (jet) arithmetic.

A :class:`Jet` holds the Taylor coefficients ``a_j = f^(j)(x)/j!`` of a scalar
function at a batch of points ``x``.  Propagating jets through closed-form
expressions yields exact derivatives of radial profiles (cutoffs, iterated-log
factors, power laws) without finite differencing.  Coefficients are numpy
arrays, so a single jet evaluates a whole batch of quadrature nodes at once.

Binary operations truncate to the shorter operand's order.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["Jet"]


class Jet:
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = [np.asarray(c, dtype=float) for c in coeffs]

    # ------------------------------------------------------------- builders
    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        """Jet of the identity function at points ``x``."""
        x = np.asarray(x, dtype=float)
        coeffs = [x]
        if order >= 1:
            coeffs.append(np.ones_like(x))
        for _ in range(order - 1):
            coeffs.append(np.zeros_like(x))
        return cls(coeffs)

    @classmethod
    def constant(cls, c, order: int, like=None) -> "Jet":
        base = np.asarray(c, dtype=float)
        if like is not None:
            base = base * np.ones_like(np.asarray(like, dtype=float))
        coeffs = [base] + [np.zeros_like(base) for _ in range(order)]
        return cls(coeffs)

    # ------------------------------------------------------------ accessors
    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    @property
    def value(self) -> np.ndarray:
        return self.coeffs[0]

    def deriv(self, j: int) -> np.ndarray:
        """The j-th derivative values, ``j! * a_j``."""
        if j > self.order:
            raise IndexError(f"jet of order {self.order} has no derivative {j}")
        return self.coeffs[j] * math.factorial(j)

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        return Jet(self.coeffs[: order + 1])

    def derivative(self) -> "Jet":
        """Jet of f' (order drops by one)."""
        if self.order < 1:
            raise IndexError("cannot differentiate an order-0 jet")
        return Jet([(j + 1) * c for j, c in enumerate(self.coeffs[1:])])

    # ----------------------------------------------------------- arithmetic
    def _coerce(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order, like=self.coeffs[0])

    def __add__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        return Jet([self.coeffs[j] + other.coeffs[j] for j in range(n + 1)])

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        n = min(self.order, other.order)
        return Jet([self.coeffs[j] - other.coeffs[j] for j in range(n + 1)])

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __neg__(self):
        return Jet([-c for c in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([c * other for c in self.coeffs])
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        out = []
        for k in range(n + 1):
            acc = a[0] * b[k]
            for j in range(1, k + 1):
                acc = acc + a[j] * b[k - j]
            out.append(acc)
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet([c / other for c in self.coeffs])
        n = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        q: list[np.ndarray] = []
        for k in range(n + 1):
            acc = a[k] if k <= self.order else 0.0
            for j in range(k):
                acc = acc - q[j] * b[k - j]
            q.append(acc / b[0])
        return Jet(q)

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    def log(self) -> "Jet":
        a = self.coeffs
        g = [np.log(a[0])]
        for k in range(1, self.order + 1):
            acc = a[k]
            for j in range(1, k):
                acc = acc - (j / k) * g[j] * a[k - j]
            g.append(acc / a[0])
        return Jet(g)

    def exp(self) -> "Jet":
        a = self.coeffs
        h = [np.exp(a[0])]
        for k in range(1, self.order + 1):
            acc = 1 * a[1] * h[k - 1]
            for j in range(2, k + 1):
                acc = acc + j * a[j] * h[k - j]
            h.append(acc / k)
        return Jet(h)

    def __pow__(self, p) -> "Jet":
        if isinstance(p, Jet):
            raise TypeError("jet exponents are not supported")
        pf = float(p)
        if pf == int(pf) and abs(pf) <= 64:
            n = int(abs(pf))
            if n == 0:
                return Jet.constant(1.0, self.order, like=self.coeffs[0])
            acc = None
            base = self
            while n:
                if n & 1:
                    acc = base if acc is None else acc * base
                base = base * base
                n >>= 1
            return acc if pf > 0 else 1.0 / acc
        return (self.log() * pf).exp()

    # ------------------------------------------------------------ piecewise
    @staticmethod
    def select(mask, when_true: "Jet", when_false: "Jet") -> "Jet":
        """Elementwise choice between two jets (same order)."""
        n = min(when_true.order, when_false.order)
        return Jet(
            [np.where(mask, when_true.coeffs[j], when_false.coeffs[j]) for j in range(n + 1)]
        )
