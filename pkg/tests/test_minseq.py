import math

import numpy as np
import pytest

from rellich import constants as C
from rellich.errors import DomainError
from rellich.minseq import (
    AsymptoticCase,
    CutoffSpec,
    MinSeqParams,
    ScanFamily,
    build_minimizer,
    default_schedule,
    leading_order_asymptotics,
    rayleigh_quotient,
    scan_result_csv,
    scan_theoretical,
    scan_to_limit,
)
from rellich.quadrature import QuadratureSpec

SPEC = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-13)


def test_cutoff_shape():
    cut = CutoffSpec()
    r = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.2])
    phi = cut(r)
    assert phi[0] == phi[1] == phi[2] == 1.0
    assert 0 < phi[3] < 1
    assert phi[4] == phi[5] == 0.0
    # C^1 across the junctions
    h = 1e-7
    for edge in (0.5, 1.0):
        left = cut(np.array([edge - h]))[0]
        right = cut(np.array([edge + h]))[0]
        assert abs(left - right) < 1e-5


def test_cutoff_derivative_matches_differences():
    cut = CutoffSpec()
    r = np.linspace(0.55, 0.95, 11)
    h = 1e-6
    fd = (cut(r + h) - cut(r - h)) / (2 * h)
    assert np.allclose(cut.derivative(r), fd, rtol=1e-7, atol=1e-9)
    assert np.all(cut.derivative(np.array([0.2, 1.1])) == 0.0)


def test_cutoff_validation():
    with pytest.raises(DomainError):
        CutoffSpec(inner_radius=0.9, outer_radius=0.5)


def test_params_validation():
    with pytest.raises(DomainError):
        MinSeqParams(4, 0.0, 1e-3, (0.1,))
    with pytest.raises(DomainError):
        MinSeqParams(6, 0.0, 0.0, (0.1,))
    with pytest.raises(DomainError):
        MinSeqParams(6, 0.0, 1e-3, ())
    with pytest.raises(DomainError):
        MinSeqParams(6, 0.0, 1e-3, (1.5,))
    with pytest.raises(DomainError):
        MinSeqParams(6, 1.2, 1e-3, (0.1,))  # m >= (N-4)/2


def test_build_minimizer_pointwise_value():
    p = MinSeqParams(6, 0.0, 0.1, (0.2,))
    tf = build_minimizer(p)
    r0 = math.exp(-1.0)
    expected = r0 ** (-1.0 + 0.1) * 0.5 ** ((-1 + 0.2) / 2)
    assert tf.profile(np.array([r0]))[0] == pytest.approx(expected, rel=1e-14)


def test_build_minimizer_unit_a_disables_log_factor():
    p = MinSeqParams(6, 0.0, 0.1, (1.0,))
    tf = build_minimizer(p)
    rr = np.array([0.1, 0.3, 0.45])
    assert np.allclose(tf.profile(rr), rr ** (-0.9), rtol=1e-14)


def test_build_minimizer_rejects_rough_cutoff():
    with pytest.raises(DomainError):
        build_minimizer(MinSeqParams(6, 0.0, 0.1, (0.2,), CutoffSpec(smoothness_order=3)))


def test_minimizer_derivatives_match_high_precision_oracle():
    import mpmath as mp

    mp.mp.dps = 40
    p = MinSeqParams(7, 0.5, 0.05, (0.3, 0.2))
    prof = build_minimizer(p).profile
    q = mp.mpf(p.power_exponent)
    e1, e2 = [(ai - 1) / mp.mpf(2) for ai in p.a]

    def w(r):
        x1v = 1 / (1 - mp.log(r))
        x2v = 1 / (1 - mp.log(x1v))
        return r**q * x1v**e1 * x2v**e2  # cutoff is identically 1 here

    rr = np.linspace(0.06, 0.44, 5)
    J = prof.taylor(rr, 4)
    for i, r0 in enumerate(rr):
        for order in range(1, 5):
            exact = float(mp.diff(w, mp.mpf(float(r0)), order))
            assert J.deriv(order)[i] == pytest.approx(exact, rel=1e-5), (order, r0)


def test_eta_b_consistency():
    p = MinSeqParams(6, 0.0, 1e-2, (0.3, 0.2, 0.1))
    rr = np.linspace(0.1, 0.9, 9)
    h = 1e-7
    etap = (p.eta(rr + h) - p.eta(rr - h)) / (2 * h)
    assert np.max(np.abs(rr * etap - p.eta_b(rr))) < 1e-8


def test_gradient_display_consistency():
    # w' = w * (q + eta/2) / r in the cutoff-free region
    p = MinSeqParams(8, 1.0, 0.05, (0.3, 0.15))
    prof = build_minimizer(p).profile
    rr = np.linspace(0.08, 0.4, 7)
    J = prof.taylor(rr, 1)
    expected = J.deriv(0) * (p.power_exponent + p.eta(rr) / 2.0) / rr
    assert np.allclose(J.deriv(1), expected, rtol=1e-12)


def test_rayleigh_direction_and_theoretical():
    q = rayleigh_quotient(ScanFamily.RELLICH_GRAD_IMPROVED, MinSeqParams(6, 0.0, 1e-3, (0.05,)), quad=SPEC)
    assert q > 0.25
    q = rayleigh_quotient(ScanFamily.GRADIENT_CONSTANT, MinSeqParams(5, 0.0, 1e-2, (0.1,)), quad=SPEC)
    q2 = rayleigh_quotient(ScanFamily.GRADIENT_CONSTANT, MinSeqParams(5, 0.0, 3e-3, (0.05,)), quad=SPEC)
    assert q >= 6.25 and q2 < q
    amn = rayleigh_quotient(ScanFamily.AMN, MinSeqParams(30, 8.0, 1e-3, (1.0,), mode_k=2), quad=SPEC)
    th = C.a_mn(30, 8).value
    assert amn >= th - 1e-9
    assert abs(amn - th) / th < 0.1


def test_reduced_path_matches_direct_path():
    import rellich.minseq as M

    for fam, N, m in [
        (ScanFamily.RELLICH_IMPROVED, 6, 0.0),
        (ScanFamily.WEIGHTED_GRAD_IMPROVED, 12, 1.0),
        (ScanFamily.DEFICIT_VLAP, 6, 0.0),
        (ScanFamily.VLAP_RADIAL_EXCESS, 9, 0.0),
    ]:
        p = MinSeqParams(N, m, 1e-4, (0.07,))
        reduced = M._rayleigh_reduced(fam, p, SPEC)
        inner, outer = M._family_densities(fam, p, 1)
        from rellich.quadrature import integrate, integrate_halfline

        s0 = math.log(1.0 / p.cutoff.inner_radius)
        num = integrate_halfline(lambda s: inner(s)[0], s0, SPEC).value
        num += integrate(lambda r: outer(r)[0], 0.5, 1.0, SPEC).value
        den = integrate_halfline(lambda s: inner(s)[1], s0, SPEC).value
        den += integrate(lambda r: outer(r)[1], 0.5, 1.0, SPEC).value
        assert reduced == pytest.approx(num / den, rel=1e-8), fam


def test_family_parameter_guards():
    with pytest.raises(DomainError):
        rayleigh_quotient(ScanFamily.RELLICH_IMPROVED, MinSeqParams(6, 0.5, 1e-3, (0.1,)), quad=SPEC)
    with pytest.raises(DomainError):
        rayleigh_quotient(ScanFamily.DEFICIT_VGRAD, MinSeqParams(6, 0.0, 1e-3, (0.1,), mode_k=1), quad=SPEC)
    with pytest.raises(DomainError):
        # weighted gradient family requires m below the mode-zero threshold
        rayleigh_quotient(ScanFamily.WEIGHTED_GRAD_IMPROVED, MinSeqParams(12, 3.0, 1e-3, (0.1,)), quad=SPEC)


def test_scan_to_limit_and_csv():
    sched = default_schedule(ScanFamily.GRADIENT_CONSTANT, 6)[:6]
    res = scan_to_limit(ScanFamily.GRADIENT_CONSTANT, sched, SPEC)
    assert res.theoretical == 9.0
    assert res.direction_ok()
    assert res.monotone
    assert res.extrapolated == res.quotients[-1]
    text = scan_result_csv(res)
    lines = text.strip().splitlines()
    assert lines[0] == "step,epsilon,a1,quotient,theoretical"
    assert len(lines) == len(sched) + 1
    assert lines[1].split(",")[0] == "0"


def test_scan_theoretical_values():
    assert scan_theoretical(ScanFamily.RELLICH_IMPROVED, MinSeqParams(6, 0.0, 1e-3, (0.1,))) == 2.5
    assert scan_theoretical(ScanFamily.RELLICH_GRAD_IMPROVED, MinSeqParams(6, 0.0, 1e-3, (0.1,))) == 0.25
    assert scan_theoretical(
        ScanFamily.WEIGHTED_RELLICH_IMPROVED, MinSeqParams(12, 1.0, 1e-3, (0.1,))
    ) == pytest.approx(C.sigma_bar(1.0, 12))


def test_default_schedule_structure():
    sched = default_schedule(ScanFamily.RELLICH_IMPROVED, 6)
    eps = [p.epsilon for p in sched]
    assert eps[:4] == [1e-2, 3e-3, 1e-3, 3e-4]
    a1 = [p.a[0] for p in sched]
    assert a1[:4] == [0.1] * 4
    assert all(a1[i + 1] <= a1[i] for i in range(len(a1) - 1))
    # eps keeps shrinking with a during the halvings
    assert all(eps[i + 1] <= eps[i] for i in range(len(eps) - 1))
    amn = default_schedule(ScanFamily.AMN, 30, 8.0, mode_k=2)
    assert all(p.a == (1.0,) for p in amn)


def test_asymptotics_stated_pair_movement():
    for case in (AsymptoticCase.V_GRADIENT, AsymptoticCase.U_GRADIENT):
        _, _, r1 = leading_order_asymptotics(case, MinSeqParams(6, 0.0, 1e-3, (0.05,)), SPEC)
        _, _, r2 = leading_order_asymptotics(case, MinSeqParams(6, 0.0, 1e-4, (0.02,)), SPEC)
        assert abs(r2 - 1.0) < abs(r1 - 1.0)


def test_asymptotics_deep_regime():
    deep = MinSeqParams(30, 0.0, math.exp(-500), (0.008,))
    lhs, rhs, ratio = leading_order_asymptotics(AsymptoticCase.V_GRADIENT, deep, SPEC)
    assert lhs > 0 and rhs > 0
    assert 0.8 <= ratio <= 1.2


def test_asymptotics_guards():
    with pytest.raises(DomainError):
        leading_order_asymptotics(AsymptoticCase.V_GRADIENT, MinSeqParams(6, 0.0, 1e-3, (0.1, 0.1)), SPEC)
    with pytest.raises(DomainError):
        leading_order_asymptotics(AsymptoticCase.U_GRADIENT, MinSeqParams(6, 0.0, 1e-150, (0.01,)), SPEC)


def test_aitken_diagnostic():
    sched = default_schedule(ScanFamily.GRADIENT_CONSTANT, 6)[:6]
    res = scan_to_limit(ScanFamily.GRADIENT_CONSTANT, sched, SPEC)
    acc = res.aitken_extrapolated()
    assert acc is not None and np.isfinite(acc)
    short = scan_to_limit(ScanFamily.GRADIENT_CONSTANT, sched[:2], SPEC)
    assert short.aitken_extrapolated() is None


def test_polyharmonic_order_one_is_mode_operator():
    from rellich.radial import RadialProfile, SphericalMode, mode_operator, polyharmonic_power

    prof = RadialProfile.from_polynomial([0, 0, 1.0, -0.3])
    mode = SphericalMode(7, 1)
    rr = np.linspace(0.1, 0.9, 5)
    assert np.allclose(polyharmonic_power(mode, prof, 1)(rr), mode_operator(mode, prof)(rr))


def test_multi_log_quotient_direct_path():
    # two log factors exercise the direct two-region path (no reduction)
    p = MinSeqParams(6, 0.0, 1e-3, (0.1, 0.1))
    q = rayleigh_quotient(ScanFamily.RELLICH_IMPROVED, p, K_series=2, quad=SPEC)
    assert q >= 2.5 - 1e-9
    p2 = MinSeqParams(6, 0.0, 1e-3, (0.1, 0.05))
    q2 = rayleigh_quotient(ScanFamily.RELLICH_IMPROVED, p2, K_series=2, quad=SPEC)
    assert q2 >= 2.5 - 1e-9
