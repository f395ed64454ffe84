from fractions import Fraction

import numpy as np
import pytest

from rellich.errors import DivergenceError
from rellich.powerseries import PowerSum


def test_from_poly_and_eval():
    ps = PowerSum.from_poly([1.0, -2.0, 0.5])
    r = np.array([0.0, 0.5, 1.0])
    assert np.allclose(ps(r), 1 - 2 * r + 0.5 * r**2)


def test_merge_and_zero():
    ps = PowerSum([1, 1, 2], [1, -1, 3])
    assert len(ps.coeffs) == 1
    assert PowerSum.zero().is_zero()
    assert not ps.is_zero()


def test_algebra_exactness():
    ps = PowerSum.from_poly([0, 1, 1])  # r + r^2
    sq = ps.square()
    # (r + r^2)^2 = r^2 + 2 r^3 + r^4, integral 1/3 + 1/2 + 1/5
    assert sq.integrate01() == float(Fraction(1, 3) + Fraction(1, 2) + Fraction(1, 5))


def test_shift_and_deriv():
    ps = PowerSum.monomial(2.5, 3.0)
    d = ps.deriv()
    assert d._float_powers[0] == 1.5
    assert float(d.coeffs[0]) == 7.5
    sh = ps.shift(-0.5)
    assert sh._float_powers[0] == 2.0


def test_mode_apply_annihilates_harmonics():
    for N in (5, 9, 30):
        for k in range(5):
            ck = k * (N + k - 2)
            out = PowerSum.monomial(k).mode_apply(N, ck)
            assert out.is_zero()


def test_mode_apply_constant_case():
    N = 7
    out = PowerSum.monomial(2).mode_apply(N, 0)
    assert len(out.coeffs) == 1
    assert float(out.coeffs[0]) == 2 * N


def test_integrate_divergence_guard():
    with pytest.raises(DivergenceError):
        PowerSum.monomial(-1.0).integrate01()


def test_exactness_under_cancellation():
    # (1-r)^6 expanded has coefficients up to 20; near r=1 the value is ~1e-12.
    # Exact rational integration keeps full relative precision.
    poly = np.polynomial.polynomial.polypow([1.0, -1.0], 6)
    ps = PowerSum.from_poly(poly).shift(20)
    exact = ps.integrate01()
    # int_0^1 r^20 (1-r)^6 dr = B(21, 7) = 20! 6! / 27!
    import math

    beta = math.factorial(20) * math.factorial(6) / math.factorial(27)
    assert exact == pytest.approx(beta, rel=1e-15)
