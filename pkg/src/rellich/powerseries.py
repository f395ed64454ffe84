"""Finite sums of real powers of r, with exact calculus.

The verification suite works on profiles of the form r^k (1-r)^p q(r) whose
derived densities under the radial mode operator are finite power sums,
possibly with non-integer exponents once weights r^{-2m} or the substitution
v = r^a u enter.  Both coefficients and exponents are kept as exact
rationals: the suite's high-dimension cases integrate to values ten orders
of magnitude below their coefficient scale, so any floating-point round-off
inside the algebra would swamp the identity residuals.  The single rounding
happens on output.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DivergenceError, DomainError

__all__ = ["PowerSum"]


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    return Fraction(float(x))


class PowerSum:
    """sum_i c_i r^{p_i} with exact rational exponents and coefficients."""

    __slots__ = ("powers", "coeffs", "_float_powers", "_float_coeffs")

    def __init__(self, powers, coeffs):
        powers = [_to_fraction(p) for p in powers]
        coeffs = [_to_fraction(c) for c in coeffs]
        if len(powers) != len(coeffs):
            raise DomainError("powers and coeffs must have matching lengths")
        merged: dict[Fraction, Fraction] = {}
        for p, c in zip(powers, coeffs):
            merged[p] = merged.get(p, Fraction(0)) + c
        items = sorted((p, c) for p, c in merged.items() if c != 0)
        if not items:
            items = [(Fraction(0), Fraction(0))]
        self.powers = [p for p, _ in items]
        self.coeffs = [c for _, c in items]
        self._float_powers = np.array([float(p) for p in self.powers])
        self._float_coeffs = np.array([float(c) for c in self.coeffs])

    # ------------------------------------------------------------- builders
    @classmethod
    def zero(cls) -> "PowerSum":
        return cls([0], [0])

    @classmethod
    def from_poly(cls, coeffs) -> "PowerSum":
        """Polynomial c_0 + c_1 r + ... as a power sum."""
        return cls(range(len(coeffs)), coeffs)

    @classmethod
    def monomial(cls, power, coeff=1) -> "PowerSum":
        return cls([power], [coeff])

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @property
    def min_power(self) -> float:
        return float(self._float_powers.min())

    # ------------------------------------------------------------- algebra
    def __add__(self, other: "PowerSum") -> "PowerSum":
        return PowerSum(self.powers + other.powers, self.coeffs + other.coeffs)

    def __sub__(self, other: "PowerSum") -> "PowerSum":
        return self + (other * -1)

    def __mul__(self, other):
        if isinstance(other, PowerSum):
            powers = []
            coeffs = []
            for p1, c1 in zip(self.powers, self.coeffs):
                for p2, c2 in zip(other.powers, other.coeffs):
                    powers.append(p1 + p2)
                    coeffs.append(c1 * c2)
            return PowerSum(powers, coeffs)
        c = _to_fraction(other)
        return PowerSum(self.powers, [ci * c for ci in self.coeffs])

    __rmul__ = __mul__

    def shift(self, alpha) -> "PowerSum":
        """Multiply by r^alpha."""
        a = _to_fraction(alpha)
        return PowerSum([p + a for p in self.powers], self.coeffs)

    def deriv(self) -> "PowerSum":
        return PowerSum(
            [p - 1 for p in self.powers],
            [c * p for c, p in zip(self.coeffs, self.powers)],
        )

    def square(self) -> "PowerSum":
        return self * self

    def mode_apply(self, N: int, ck) -> "PowerSum":
        """f'' + (N-1) f'/r - c_k f / r^2, exactly."""
        out = self.deriv().deriv() + (N - 1) * self.deriv().shift(-1)
        if ck:
            out = out - int(ck) * self.shift(-2)
        return out

    # ---------------------------------------------------------- evaluation
    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        flat = r.ravel()
        out = np.zeros_like(flat)
        for p, c in zip(self._float_powers, self._float_coeffs):
            if p == 0.0:
                out += c
            else:
                out += c * flat**p
        return out.reshape(r.shape)

    def integrate01(self) -> float:
        """Exact value of int_0^1 of this power sum (rounded once on output)."""
        total = Fraction(0)
        for p, c in zip(self.powers, self.coeffs):
            if p <= -1:
                raise DivergenceError(f"non-integrable power {float(p)} at the origin")
            total += c / (p + 1)
        return float(total)
