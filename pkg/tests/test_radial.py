import math

import numpy as np
import numpy.polynomial.polynomial as P
import pytest

from rellich.errors import DifferentiabilityError, DomainError
from rellich.quadrature import QuadratureSpec
from rellich.radial import (
    Functional,
    RadialProfile,
    Representation,
    SphericalMode,
    TestFunction,
    functional,
    g_profile,
    mode_operator,
    polyharmonic_power,
    profile_from_csv,
    sphere_area,
    substitute_u,
    substitute_v,
)

RR = np.linspace(0.05, 0.95, 9)


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_mode_eigenvalues():
    assert SphericalMode(6, 0).eigenvalue == 0
    assert SphericalMode(5, 1).eigenvalue == 4
    assert SphericalMode(30, 2).eigenvalue == 60
    with pytest.raises(DomainError):
        SphericalMode(6, -1)


def test_mode_operator_on_r_squared():
    N = 7
    prof = RadialProfile.from_polynomial([0, 0, 1])
    out = mode_operator(SphericalMode(N, 0), prof)
    assert np.allclose(out(RR), 2 * N)


def test_mode_operator_mode_one_cubic():
    out = mode_operator(SphericalMode(5, 1), RadialProfile.from_polynomial([0, 0, 0, 1]))
    assert np.allclose(out(RR), 14 * RR)


def test_mode_operator_annihilates_harmonic_powers():
    for N in range(5, 31):
        for k in range(6):
            prof = RadialProfile.from_polynomial([0.0] * k + [1.0])
            vals = mode_operator(SphericalMode(N, k), prof)(RR)
            assert np.all(np.abs(vals) < 1e-10 * RR ** (k - 2))


def test_mode_operator_in_cartesian_coordinates():
    """Independent oracle: N-dimensional finite differences on u = f(r)/r^k H_k(x)
    with a solid harmonic H_k."""
    N = 5
    cases = [
        (1, lambda x: x[0]),  # H_1 = x_1
        (2, lambda x: x[0] * x[1]),  # H_2 = x_1 x_2
    ]
    coeffs = [0, 0, 0, 1.0, -0.5]  # f = r^3 - 0.5 r^4
    prof = RadialProfile.from_polynomial(coeffs)
    point = np.full(N, 0.31)
    h = 1e-3
    for k, harmonic in cases:
        mode = SphericalMode(N, k)
        lk = mode_operator(mode, prof)

        def u(x):
            r = math.sqrt(float(np.dot(x, x)))
            return prof(np.array([r]))[0] / r**k * harmonic(x)

        lap = 0.0
        for axis in range(N):
            e = np.zeros(N)
            e[axis] = h
            lap += (u(point + e) - 2 * u(point) + u(point - e)) / h**2
        r0 = math.sqrt(float(np.dot(point, point)))
        expected = lk(np.array([r0]))[0] / r0**k * harmonic(point)
        assert lap == pytest.approx(expected, rel=1e-4)


def test_polyharmonic_power():
    N = 6
    prof = RadialProfile.from_polynomial([0, 0, 0, 0, 1])
    out = polyharmonic_power(SphericalMode(N, 0), prof, 2)
    assert np.allclose(out(RR), 8 * N * (N + 2))
    with pytest.raises(DomainError):
        polyharmonic_power(SphericalMode(N, 0), prof, 0)


def test_polyharmonic_rejects_low_differentiability():
    r = np.linspace(0.0, 1.0, 64)
    spline = RadialProfile.from_samples(r, r**2 * (1 - r) ** 3)
    with pytest.raises(DifferentiabilityError):
        polyharmonic_power(SphericalMode(6, 0), spline, 3)


def test_substitute_round_trip():
    prof = RadialProfile.from_polynomial([0, 0, 1.0, -0.3, 0.1])
    for m in (0.0, 0.7):
        tf = TestFunction(prof, SphericalMode(6, 1))
        v = substitute_v(tf, m)
        assert v.representation is Representation.V_SIDE
        u2 = substitute_u(v, m)
        assert np.allclose(u2.profile(RR), prof(RR), rtol=1e-14)
    with pytest.raises(DomainError):
        substitute_u(tf, 0.0)


def test_substitute_v_power_arithmetic():
    # N = 6, m = 0: the v-side profile gains one power of r
    s = RadialProfile.from_polynomial([1.0, 0.5])
    tf = TestFunction(s.power_shift(1.0), SphericalMode(6, 0))
    v = substitute_v(tf, 0.0)
    assert np.allclose(v.profile(RR), RR**2 * s(RR))


def test_g_profile_reduction():
    prof = RadialProfile.from_polynomial([0, 0, 1.0])
    tf = TestFunction(prof, SphericalMode(8, 2))
    g = g_profile(tf, 0.0)  # g = r^{(N-4)/2 - k} f = f for N=8, k=2
    assert np.allclose(g(RR), prof(RR))


def test_origin_order_verification():
    prof = RadialProfile.from_polynomial([0, 0, 1.0], origin_order=2)
    assert prof.verify_origin_order()
    bad = RadialProfile.from_jet_fn(lambda J: J**0.5, origin_order=2.0)
    assert not bad.verify_origin_order()


@pytest.mark.parametrize("name", [Functional.I, Functional.II])
def test_functional_cross_checks_polynomial(name):
    spec = QuadratureSpec()
    for N, k in [(5, 0), (6, 1), (9, 2), (30, 3)]:
        coeffs = P.polymul([0.0] * k + [1.0], P.polypow([1, -1], 3))
        tf = TestFunction(RadialProfile.from_polynomial(coeffs), SphericalMode(N, k))
        fv = functional(name, tf, quad=spec)
        tol = 10 * fv.quadrature_error + 1e-12 * abs(fv.value)
        assert abs(fv.value - fv.cross_value) <= tol
        assert abs(fv.value - sum(fv.components.values())) <= fv.quadrature_error + 1e-12


def test_functional_cross_checks_weighted():
    spec = QuadratureSpec()
    coeffs = P.polymul([0, 0, 1.0], P.polypow([1, -1], 3))
    tf = TestFunction(RadialProfile.from_polynomial(coeffs), SphericalMode(9, 2))
    for name in (Functional.WEIGHTED_LAPLACIAN, Functional.WEIGHTED_GRADIENT):
        fv = functional(name, tf, m=1.3, quad=spec)
        assert abs(fv.value - fv.cross_value) <= 10 * fv.quadrature_error + 1e-11 * abs(fv.value)


def test_functional_j_matches_deficit():
    coeffs = P.polymul([0, 0, 1.0], P.polypow([1, -1], 3))
    tf = TestFunction(RadialProfile.from_polynomial(coeffs), SphericalMode(9, 2))
    v = substitute_v(tf, 0.0)
    jv = functional(Functional.J, v)
    iu = functional(Functional.I, tf)
    assert jv.value == pytest.approx(iu.value, rel=1e-10)
    jjv = functional(Functional.JJ, v)
    iiu = functional(Functional.II, tf)
    assert jjv.value == pytest.approx(iiu.value, rel=1e-10)


def test_functional_cross_checks_spline_backend():
    r = np.linspace(0.0, 1.0, 200)
    rng = np.random.default_rng(3)
    q = rng.uniform(-1, 1, 4)
    for N, k in [(5, 0), (6, 1)]:
        values = r ** (k + 1) * (1 - r) ** 3 * P.polyval(r, q)
        spline = RadialProfile.from_samples(r, values, origin_order=k + 1)
        tf = TestFunction(spline, SphericalMode(N, k))
        fv = functional(Functional.I, tf)
        # spline derivatives limit the agreement; interpolation error dominates
        assert fv.cross_value == pytest.approx(fv.value, rel=1e-5, abs=1e-7)


def test_functional_zero_profile():
    tf = TestFunction(RadialProfile.from_polynomial([0.0]), SphericalMode(5, 0))
    for name in (Functional.I, Functional.II, Functional.WEIGHTED_HARDY):
        assert functional(name, tf).value == 0.0


def test_functional_series_term():
    coeffs = P.polymul([0, 0, 1.0], P.polypow([1, -1], 3))
    tf = TestFunction(RadialProfile.from_polynomial(coeffs), SphericalMode(9, 2))
    t1 = functional(Functional.SERIES_TERM, tf, m=0.5, series_index=1).value
    t2 = functional(Functional.SERIES_TERM, tf, m=0.5, series_index=2).value
    assert 0 < t2 < t1


def test_quadratic_parallelogram_additivity():
    # quadratic functionals satisfy Q[f+g] + Q[f-g] = 2Q[f] + 2Q[g]
    spec = QuadratureSpec()
    mode = SphericalMode(6, 1)
    f = RadialProfile.from_polynomial(P.polymul([0, 1.0], P.polypow([1, -1], 3)))
    g = RadialProfile.from_polynomial(P.polymul([0, 0, 1.0], P.polypow([1, -1], 4)))
    for name in (Functional.I, Functional.II):
        qf = functional(name, TestFunction(f, mode), quad=spec).value
        qg = functional(name, TestFunction(g, mode), quad=spec).value
        qs = functional(name, TestFunction(f + g, mode), quad=spec).value
        qd = functional(name, TestFunction(f + (-1.0) * g, mode), quad=spec).value
        assert qs + qd == pytest.approx(2 * qf + 2 * qg, rel=1e-9)


def test_hardy_moment_inequalities_on_random_profiles():
    # one-dimensional Hardy relations between reduced-profile moments
    rng = np.random.default_rng(11)
    for _ in range(20):
        k = int(rng.integers(0, 4))
        N = int(rng.choice([5, 6, 9, 30]))
        q = rng.uniform(-1, 1, 5)
        coeffs = P.polymul([0.0] * (k + int(rng.integers(0, 3))) + [1.0], P.polypow([1, -1], int(rng.integers(3, 6))))
        coeffs = P.polymul(coeffs, q)
        tf = TestFunction(RadialProfile.from_polynomial(coeffs), SphericalMode(N, k))
        g = g_profile(tf, 0.0)
        rr = np.linspace(1e-4, 1.0, 4001)[:-1]
        g0, g1, g2 = (g.taylor(rr, 2).deriv(j) for j in range(3))
        w = np.gradient(rr)
        lhs1 = np.sum(rr ** (2 * k + 3) * g2**2 * w)
        rhs1 = (k + 1) ** 2 * np.sum(rr ** (2 * k + 1) * g1**2 * w)
        assert lhs1 >= rhs1 * (1 - 1e-3)
        lhs2 = np.sum(rr ** (2 * k + 1) * g1**2 * w)
        rhs2 = k**2 * np.sum(rr ** (2 * k - 1) * g0**2 * w)
        assert lhs2 >= rhs2 * (1 - 1e-3)


def test_profile_csv_import(tmp_path):
    r = np.linspace(0.0, 1.0, 160)
    f = r**2 * (1 - r) ** 3
    d1 = 2 * r * (1 - r) ** 3 - 3 * r**2 * (1 - r) ** 2
    path = tmp_path / "profile.csv"
    rows = ["r,f,f1"] + [f"{ri},{fi},{di}" for ri, fi, di in zip(r, f, d1)]
    path.write_text("\n".join(rows) + "\n")
    prof = profile_from_csv(path, origin_order=2)
    assert np.allclose(prof(RR), RR**2 * (1 - RR) ** 3, atol=1e-9)
    bad = tmp_path / "bad.csv"
    rows = ["r,f,f1"] + [f"{ri},{fi},{di * 3}" for ri, fi, di in zip(r, f, d1)]
    bad.write_text("\n".join(rows) + "\n")
    with pytest.raises(DomainError):
        profile_from_csv(bad, origin_order=2)


def test_functional_dual_route_randomized_suite():
    """Direct and identity-reduced evaluations agree across a randomized suite
    of closed-form and spline-backed profiles."""
    rng = np.random.default_rng(23)
    spec = QuadratureSpec()
    grid = [(N, k) for N in (5, 6, 9, 30) for k in (0, 1, 2, 3)]
    checked = 0
    for i in range(50):
        N, k = grid[i % len(grid)]
        j = int(rng.integers(0, 3))
        p = int(rng.integers(3, 6))
        q = rng.uniform(-1, 1, 4)
        coeffs = P.polymul([0.0] * (k + j) + [1.0], P.polymul(P.polypow([1, -1], p), q))
        if i % 2 == 0:
            prof = RadialProfile.from_polynomial(coeffs)
        else:
            r = np.linspace(0.0, 1.0, 240)
            prof = RadialProfile.from_samples(r, P.polyval(r, coeffs), origin_order=k + j)
        tf = TestFunction(prof, SphericalMode(N, k))
        cycle = (
            Functional.I,
            Functional.II,
            Functional.WEIGHTED_GRADIENT,
            Functional.WEIGHTED_LAPLACIAN,
            Functional.J,
            Functional.JJ,
        )
        name = cycle[i % len(cycle)]
        weighted = name in (Functional.WEIGHTED_GRADIENT, Functional.WEIGHTED_LAPLACIAN)
        if name in (Functional.J, Functional.JJ):
            tf = substitute_v(tf, 0.0)
        fv = functional(name, tf, m=0.4 if weighted else 0.0, quad=spec)
        scale = abs(fv.value) + abs(fv.cross_value) + 1e-12
        tol = 10 * fv.quadrature_error + (1e-4 if i % 2 else 1e-9) * scale
        assert abs(fv.value - fv.cross_value) <= tol, (i, N, k, name)
        checked += 1
    assert checked == 50


def test_functional_series_term_gradient_base():
    coeffs = P.polymul([0, 0, 1.0], P.polypow([1, -1], 3))
    tf = TestFunction(RadialProfile.from_polynomial(coeffs), SphericalMode(9, 2))
    hv = functional(Functional.SERIES_TERM, tf, m=0.5, series_index=1).value
    gv = functional(
        Functional.SERIES_TERM, tf, m=0.5, series_index=1, series_base=Functional.WEIGHTED_GRADIENT
    ).value
    assert hv > 0 and gv > 0 and gv != hv
    with pytest.raises(DomainError):
        functional(Functional.SERIES_TERM, tf, series_index=1, series_base=Functional.I)
