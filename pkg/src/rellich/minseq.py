"""Minimizing sequences and Rayleigh-quotient scans.

The sequences have radial factor w(r) = r^{-(N-4-2m)/2 + eps} X_1^{(-1+a_1)/2}
... X_K^{(-1+a_K)/2} times a smooth cutoff phi, optionally carried on a
spherical mode phi_k.  Their quotients converge (logarithmically in the a_i,
polynomially in eps) to the sharp constants as the parameters shrink in the
order eps, then a_1, ..., then a_K.

Every integral splits at the cutoff's inner radius.  On (0, inner] the cutoff
is identically 1 and the densities have the exact closed form
e^{-2 eps s} * prod X_i^{-1+a_i} * (polynomial in eta, B, X-products), which
is evaluated directly in s = ln(1/r); this is what lets the scans see the
logarithmically deep mass that no r-space sample could represent.  On
[inner, outer] the full profile (with cutoff derivatives) is evaluated by jet
arithmetic in r.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import constants as C
from .errors import DomainError, QuadratureError
from .iterlog import xk_values
from .quadrature import QuadratureSpec, integrate, integrate_halfline
from .radial import RadialProfile, SphericalMode, TestFunction, mode_operator
from .taylor import Jet

__all__ = [
    "CutoffSpec",
    "MinSeqParams",
    "ScanFamily",
    "ScanResult",
    "AsymptoticCase",
    "build_minimizer",
    "rayleigh_quotient",
    "scan_to_limit",
    "default_schedule",
    "leading_order_asymptotics",
    "scan_result_csv",
]


def _smoothstep_coeffs(n: int) -> list[int]:
    """Ascending coefficients of the degree-(2n+1) smoothstep with n flat
    derivatives at both ends; S(0)=0, S(1)=1."""
    coeffs = [0] * (2 * n + 2)
    for j in range(n + 1):
        coeffs[n + j + 1] = (-1) ** j * math.comb(n + j, j) * math.comb(2 * n + 1, n - j)
    return coeffs


@dataclass(frozen=True)
class CutoffSpec:
    """Radial cutoff: 1 on [0, inner], 0 on [outer, D], a polynomial
    smoothstep of degree 2*smoothness_order+1 in between."""

    inner_radius: float = 0.5
    outer_radius: float = 1.0
    smoothness_order: int = 4

    def __post_init__(self):
        if not 0.0 < self.inner_radius < self.outer_radius:
            raise DomainError("need 0 < inner_radius < outer_radius")
        if self.smoothness_order < 1:
            raise DomainError("smoothness_order must be >= 1")

    def _coeffs(self) -> list[int]:
        return _smoothstep_coeffs(self.smoothness_order)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        t = np.clip((r - self.inner_radius) / (self.outer_radius - self.inner_radius), 0.0, 1.0)
        coeffs = self._coeffs()
        s = np.zeros_like(t)
        for c in reversed(coeffs):
            s = s * t + c
        return 1.0 - s

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        width = self.outer_radius - self.inner_radius
        t = np.clip((r - self.inner_radius) / width, 0.0, 1.0)
        coeffs = self._coeffs()
        ds = np.zeros_like(t)
        for k in range(len(coeffs) - 1, 0, -1):
            ds = ds * t + k * coeffs[k]
        inside = (r > self.inner_radius) & (r < self.outer_radius)
        return np.where(inside, -ds / width, 0.0)

    def jet(self, J: Jet) -> Jet:
        width = self.outer_radius - self.inner_radius
        t = (J - self.inner_radius) * (1.0 / width)
        coeffs = self._coeffs()
        s = Jet.constant(0.0, J.order, like=J.value)
        for c in reversed(coeffs):
            s = s * t + float(c)
        phi = 1.0 - s
        one = Jet.constant(1.0, J.order, like=J.value)
        zero = Jet.constant(0.0, J.order, like=J.value)
        phi = Jet.select(J.value <= self.inner_radius, one, phi)
        return Jet.select(J.value >= self.outer_radius, zero, phi)


@dataclass(frozen=True)
class MinSeqParams:
    """Parameters (N, m, eps, a_1..a_K, cutoff, mode) of a minimizing sequence.

    a_i = 1 switches the i-th iterated-log factor off (exponent 0), which is
    how the pure-power sequences are expressed while keeping K >= 1.
    """

    N: int
    m: float = 0.0
    epsilon: float = 1e-3
    a: tuple[float, ...] = (0.1,)
    cutoff: CutoffSpec = field(default_factory=CutoffSpec)
    mode_k: int = 0

    def __post_init__(self):
        if self.N < 5 or self.N != int(self.N):
            raise DomainError(f"dimension must be an integer >= 5, got {self.N}")
        if not 0 <= self.m < (self.N - 4) / 2:
            raise DomainError(f"need 0 <= m < (N-4)/2, got m={self.m}")
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if len(self.a) < 1:
            raise DomainError("need at least one log-factor exponent (a_1 = 1 disables it)")
        if any(not 0.0 < ai <= 1.0 for ai in self.a):
            raise DomainError(f"every a_i must lie in (0, 1], got {self.a}")
        if self.mode_k < 0 or self.mode_k != int(self.mode_k):
            raise DomainError("mode_k must be a nonnegative integer")

    @property
    def power_exponent(self) -> float:
        """Exponent of the leading power: -(N-4-2m)/2 + eps."""
        return -(self.N - 4.0 - 2.0 * self.m) / 2.0 + self.epsilon

    def _products(self, r):
        xs = xk_values(len(self.a), r)
        prods, acc = [], None
        for x in xs:
            acc = x if acc is None else acc * x
            prods.append(acc)
        return prods

    def eta(self, r):
        """eta(r) = sum_i (-1 + a_i) X_1...X_i."""
        prods = self._products(np.asarray(r, dtype=float))
        out = sum((-1.0 + ai) * p for ai, p in zip(self.a, prods))
        return out if isinstance(r, np.ndarray) else float(out)

    def eta_b(self, r):
        """B(r) = r eta'(r) = sum_i (-1 + a_i) P_i Q_i with Q_i = sum_{j<=i} P_j."""
        prods = self._products(np.asarray(r, dtype=float))
        out = 0.0
        q = 0.0
        for ai, p in zip(self.a, prods):
            q = q + p
            out = out + (-1.0 + ai) * p * q
        return out if isinstance(r, np.ndarray) else float(out)


def build_minimizer(params: MinSeqParams) -> TestFunction:
    """Assemble the sequence member as a TestFunction with analytic derivatives.

    The profile is r^{-(N-4-2m)/2+eps} * prod_i X_i^{(-1+a_i)/2} * phi(r),
    differentiated through the iterated-log chain rule by jet propagation.
    """
    if params.cutoff.smoothness_order < 4:
        raise DomainError("cutoff smoothness_order must be >= 4 (four derivatives needed)")
    q = params.power_exponent
    exponents = [(-1.0 + ai) / 2.0 for ai in params.a]
    cutoff = params.cutoff

    def fn(J: Jet) -> Jet:
        out = J**q
        x = J
        for e in exponents:
            x = 1.0 / (1.0 - x.log())
            if e != 0.0:
                out = out * x**e
        return out * cutoff.jet(J)

    profile = RadialProfile.from_jet_fn(
        fn, support=(0.0, cutoff.outer_radius), origin_order=q
    )
    return TestFunction(profile, SphericalMode(params.N, params.mode_k))


class ScanFamily(Enum):
    """Rayleigh-quotient families and the constants their scans approach."""

    RELLICH_IMPROVED = "rellich-improved"              # -> 1 + N(N-4)/8
    RELLICH_GRAD_IMPROVED = "rellich-gradient-improved"  # -> 1/4
    WEIGHTED_RELLICH_IMPROVED = "weighted-rellich-improved"  # -> sigma_bar(m, N)
    WEIGHTED_GRAD_IMPROVED = "weighted-gradient-improved"  # -> 1/4
    AMN = "amn"                                        # -> a_{m,N} per-mode candidate
    DEFICIT_VGRAD = "rellich-deficit-vgrad"            # -> 4 + N(N-4)/2
    DEFICIT_VLAP = "rellich-deficit-vlap"              # -> 1/2 + 2/(N-2)^2
    GRAD_DEFICIT_VGRAD = "gradrellich-deficit-vgrad"   # -> ((N-4)/2)^2
    VLAP_RADIAL_EXCESS = "v-laplacian-radial-excess"   # -> 2(N-2)^2
    GRAD_DEFICIT_VLAP = "gradrellich-deficit-vlap"     # -> ((N-4)/(2(N-2)))^2
    GRADIENT_CONSTANT = "rellich-gradient"             # -> N^2/4


_DEFICIT_FAMILIES = {
    ScanFamily.DEFICIT_VGRAD,
    ScanFamily.DEFICIT_VLAP,
    ScanFamily.GRAD_DEFICIT_VGRAD,
    ScanFamily.VLAP_RADIAL_EXCESS,
    ScanFamily.GRAD_DEFICIT_VLAP,
    ScanFamily.GRADIENT_CONSTANT,
}


def scan_theoretical(family: ScanFamily, params: MinSeqParams) -> float:
    N, m = params.N, params.m
    if family is ScanFamily.RELLICH_IMPROVED:
        return 1.0 + N * (N - 4) / 8.0
    if family is ScanFamily.RELLICH_GRAD_IMPROVED:
        return 0.25
    if family is ScanFamily.WEIGHTED_RELLICH_IMPROVED:
        return C.sigma_bar(m, N)
    if family is ScanFamily.WEIGHTED_GRAD_IMPROVED:
        if m > C.m_star(N):
            raise DomainError(f"family requires m <= m*(N) = {C.m_star(N):.6g}")
        return 0.25
    if family is ScanFamily.AMN:
        return C.a_mn(N, m).value
    return C.section2_constants(N)[family.value]


class _InnerTerms:
    """Closed-form pieces of the inner-region densities, in s-coordinates.

    The sequences' Laplacian factor splits as lap_u = A0 + delta, where
    A0 = q0^2 + (N-2) q0 - c_k is the parameter-free constant and delta
    carries a factor of eps, eta or B in every monomial.  Numerator
    combinations with the sharp constants are evaluated in the factored
    forms lap_u^2 - A0^2 = delta (2 A0 + delta) (the constant cancellation
    is exact), so no catastrophic subtraction occurs even at very deep s.
    """

    def __init__(self, params: MinSeqParams, s: np.ndarray, chain_len: int):
        s = np.asarray(s, dtype=float)
        count = max(chain_len, len(params.a))
        xs = []
        v = 1.0 / (1.0 + s)
        for _ in range(count):
            xs.append(v)
            v = 1.0 / (1.0 - np.log(v))
        self.prods = []
        acc = np.ones_like(s)
        for x in xs:
            acc = acc * x
            self.prods.append(acc)
        self.common = np.exp(-2.0 * params.epsilon * s)
        eta = np.zeros_like(s)
        B = np.zeros_like(s)
        q_acc = np.zeros_like(s)
        for ai, p in zip(params.a, self.prods):
            eta = eta + (-1.0 + ai) * p
            q_acc = q_acc + p
            B = B + (-1.0 + ai) * p * q_acc
        for ai, x in zip(params.a, xs):
            if ai != 1.0:
                self.common = self.common * x ** (-1.0 + ai)
        self.eta = eta
        self.B = B
        N = params.N
        eps = params.epsilon
        ck = params.mode_k * (N + params.mode_k - 2)
        q0 = params.power_exponent - eps
        self.q0 = q0
        self.A0 = q0 * q0 + (N - 2) * q0 - ck
        # lap_u = A0 + delta_u; every monomial of delta_u carries eps, eta or B
        self.delta_u = (
            eps * (2 * q0 + N - 2 + eps)
            + (q0 + eps + (N - 2) / 2.0) * eta
            + eta * eta / 4.0
            + B / 2.0
        )
        self.lap_u = self.A0 + self.delta_u
        # gradient factor T_u = q0 + gamma_u with small gamma_u
        self.gamma_u = eps + eta / 2.0
        self.T_u = q0 + self.gamma_u
        # v-side factors (exponent eps): both are built from small quantities
        self.T_v = eps + eta / 2.0
        self.lap_v = self.T_v * (self.T_v + N - 2) + B / 2.0 - ck
        self.ck = ck

    def lap_sq_minus(self, constant: float) -> np.ndarray:
        """lap_u^2 - constant, factored exactly when constant is A0^2."""
        if abs(constant - self.A0 * self.A0) <= 1e-9 * abs(constant):
            return self.delta_u * (2.0 * self.A0 + self.delta_u)
        return self.lap_u**2 - constant

    def lap_sq_minus_grad(self, coeff: float) -> np.ndarray:
        """lap_u^2 - coeff * T_u^2 with the constant parts cancelled exactly.

        Valid whenever coeff * q0^2 == A0^2, which holds for the sharp
        gradient constants ((N+2m)/2)^2 at mode 0.
        """
        d, g = self.delta_u, self.gamma_u
        return d * (2.0 * self.A0 + d) - coeff * g * (2.0 * self.q0 + g)

    def series_sum_weight(self, upto: int) -> np.ndarray:
        out = np.zeros_like(self.common)
        for i in range(upto):
            out = out + self.prods[i] ** 2
        return out

    def product_sq(self, i: int) -> np.ndarray:
        return self.prods[i - 1] ** 2


class _OuterTerms:
    """Jet-evaluated pieces of the densities on the cutoff transition zone."""

    def __init__(self, params: MinSeqParams, chain_len: int):
        self.params = params
        tf = build_minimizer(params)
        self.mode = tf.mode
        self.u = tf.profile
        self.v = tf.profile.power_shift((params.N - 4.0 - 2.0 * params.m) / 2.0)
        self.lk_u = mode_operator(self.mode, self.u)
        self.lk_v = mode_operator(self.mode, self.v)
        self.chain_len = chain_len

    def pieces(self, r: np.ndarray) -> dict[str, np.ndarray]:
        params = self.params
        N, m = params.N, params.m
        ck = self.mode.eigenvalue
        u0, u1 = self.u.derivative_values(r, 1)
        v0, v1 = self.v.derivative_values(r, 1)
        out = {
            "lap_u": self.lk_u(r) ** 2 * r ** (N - 1 - 2 * m),
            "grad_u": (u1**2 + (ck * (u0 / r) ** 2 if ck else 0.0)) * r ** (N - 3 - 2 * m),
            "hardy_u": u0**2 * r ** (N - 5 - 2 * m),
            "lap_v": self.lk_v(r) ** 2 * r**3,
            "grad_v": (v1**2 + (ck * (v0 / r) ** 2 if ck else 0.0)) * r,
            "rad_v": v1**2 * r,
        }
        prods = []
        acc = np.ones_like(r)
        for x in xk_values(self.chain_len, r):
            acc = acc * x
            prods.append(acc)
        out["prods"] = prods
        return out


def _family_densities(family: ScanFamily, params: MinSeqParams, K: int):
    """(numerator, denominator) builders over the inner and outer regions."""
    N, m = params.N, params.m
    if family in _DEFICIT_FAMILIES and (m != 0.0 or params.mode_k != 0):
        raise DomainError(f"{family.value} scans use m = 0 and the radial mode")
    if family in (ScanFamily.RELLICH_IMPROVED, ScanFamily.RELLICH_GRAD_IMPROVED) and m != 0.0:
        raise DomainError(f"{family.value} scans use m = 0")
    if family is not ScanFamily.AMN and params.mode_k != 0:
        raise DomainError(f"{family.value} scans use the radial mode")
    if family is ScanFamily.WEIGHTED_GRAD_IMPROVED and m > C.m_star(N):
        raise DomainError(f"family requires m <= m*(N) = {C.m_star(N):.6g}")

    rellich = (N * (N - 4) / 4.0) ** 2
    sig = float(C._sigma_exact(m, N))
    sbar = float(C._sigma_bar_exact(m, N))
    sbar0 = 1.0 + N * (N - 4) / 8.0
    wgrad = ((N + 2 * m) / 2.0) ** 2

    def inner(s):
        t = _InnerTerms(params, s, K)
        if family is ScanFamily.RELLICH_IMPROVED:
            num = t.lap_sq_minus(rellich) - sbar0 * t.series_sum_weight(K - 1)
            den = t.product_sq(K)
        elif family is ScanFamily.WEIGHTED_RELLICH_IMPROVED:
            num = t.lap_sq_minus(sig) - sbar * t.series_sum_weight(K - 1)
            den = t.product_sq(K)
        elif family is ScanFamily.RELLICH_GRAD_IMPROVED:
            num = t.lap_sq_minus_grad(N * N / 4.0) - 0.25 * t.T_u**2 * t.series_sum_weight(K - 1)
            den = t.T_u**2 * t.product_sq(K)
        elif family is ScanFamily.WEIGHTED_GRAD_IMPROVED:
            num = t.lap_sq_minus_grad(wgrad) - 0.25 * t.T_u**2 * t.series_sum_weight(K - 1)
            den = t.T_u**2 * t.product_sq(K)
        elif family is ScanFamily.AMN:
            num = t.lap_u**2
            den = t.T_u**2 + t.ck
        elif family is ScanFamily.DEFICIT_VGRAD:
            num = t.lap_sq_minus(rellich)
            den = t.T_v**2
        elif family is ScanFamily.DEFICIT_VLAP:
            num = t.lap_sq_minus(rellich)
            den = t.lap_v**2
        elif family is ScanFamily.GRAD_DEFICIT_VGRAD:
            num = t.lap_sq_minus_grad(N * N / 4.0)
            den = t.T_v**2
        elif family is ScanFamily.VLAP_RADIAL_EXCESS:
            num = t.lap_v**2
            den = 0.5 * t.T_v**2
        elif family is ScanFamily.GRAD_DEFICIT_VLAP:
            num = t.lap_sq_minus_grad(N * N / 4.0)
            den = t.lap_v**2
        elif family is ScanFamily.GRADIENT_CONSTANT:
            num = t.lap_u**2
            den = t.T_u**2
        else:  # pragma: no cover
            raise DomainError(f"unknown family {family}")
        return t.common * num, t.common * den

    outer_terms = _OuterTerms(params, K)

    def outer(r):
        p = outer_terms.pieces(r)
        series = np.zeros_like(r)
        for i in range(K - 1):
            series = series + p["prods"][i] ** 2
        pk2 = p["prods"][K - 1] ** 2
        if family is ScanFamily.RELLICH_IMPROVED:
            num = p["lap_u"] - rellich * p["hardy_u"] - sbar0 * p["hardy_u"] * series
            den = p["hardy_u"] * pk2
        elif family is ScanFamily.WEIGHTED_RELLICH_IMPROVED:
            num = p["lap_u"] - sig * p["hardy_u"] - sbar * p["hardy_u"] * series
            den = p["hardy_u"] * pk2
        elif family is ScanFamily.RELLICH_GRAD_IMPROVED:
            num = p["lap_u"] - (N * N / 4.0) * p["grad_u"] - 0.25 * p["grad_u"] * series
            den = p["grad_u"] * pk2
        elif family is ScanFamily.WEIGHTED_GRAD_IMPROVED:
            num = p["lap_u"] - wgrad * p["grad_u"] - 0.25 * p["grad_u"] * series
            den = p["grad_u"] * pk2
        elif family is ScanFamily.AMN:
            num = p["lap_u"]
            den = p["grad_u"]
        elif family is ScanFamily.DEFICIT_VGRAD:
            num = p["lap_u"] - rellich * p["hardy_u"]
            den = p["grad_v"]
        elif family is ScanFamily.DEFICIT_VLAP:
            num = p["lap_u"] - rellich * p["hardy_u"]
            den = p["lap_v"]
        elif family is ScanFamily.GRAD_DEFICIT_VGRAD:
            num = p["lap_u"] - (N * N / 4.0) * p["grad_u"]
            den = p["grad_v"]
        elif family is ScanFamily.VLAP_RADIAL_EXCESS:
            num = p["lap_v"]
            den = p["rad_v"] - 0.5 * p["grad_v"]
        elif family is ScanFamily.GRAD_DEFICIT_VLAP:
            num = p["lap_u"] - (N * N / 4.0) * p["grad_u"]
            den = p["lap_v"]
        elif family is ScanFamily.GRADIENT_CONSTANT:
            num = p["lap_u"]
            den = p["grad_u"]
        else:  # pragma: no cover
            raise DomainError(f"unknown family {family}")
        return num, den

    return inner, outer


# --------------------------------------------------------------------------
# Exact reduction of the single-log quotients.
#
# With one log factor the inner-region densities are common * P(eps, X_1)
# with common = r^{-1+2eps} X_1^{-1+a} phi^2 and P polynomial.  Writing
# Q(b) = int_0^1 r^{-1+2eps} X_1^b phi^2 dr, every density integral is a sum
# of c_j(eps) Q(-1+a+j).  The exact identity (integrate d/dr [r^{2eps} X_1^b
# phi^2] over (0,1])
#
#     eps Q(b) = -(b/2) Q(b+1) - C(b)/2,   C(b) = int r^{2eps} X_1^b (phi^2)' dr
#
# eliminates the divergent-as-eps->0 integrals Q(-1+a) and Q(a); the sharp
# constants make the eliminated coefficients vanish to order eps exactly, so
# the reduced form has bounded coefficients and is evaluable at denormal eps,
# where the direct quadrature would have to cancel ~Q(a) of signed mass.
# This mirrors the limit computation that proves the best constants, except
# that the cutoff terms C(b) are kept instead of being absorbed into O(1).


class _Poly2:
    """Polynomial in (eps, X) with a small dense coefficient matrix."""

    __slots__ = ("c",)

    def __init__(self, c):
        self.c = np.atleast_2d(np.asarray(c, dtype=float))

    @classmethod
    def const(cls, v: float) -> "_Poly2":
        return cls([[float(v)]])

    @classmethod
    def eps(cls) -> "_Poly2":
        return cls([[0.0], [1.0]])

    @classmethod
    def x(cls) -> "_Poly2":
        return cls([[0.0, 1.0]])

    def __add__(self, other):
        if not isinstance(other, _Poly2):
            other = _Poly2.const(other)
        ni = max(self.c.shape[0], other.c.shape[0])
        nj = max(self.c.shape[1], other.c.shape[1])
        out = np.zeros((ni, nj))
        out[: self.c.shape[0], : self.c.shape[1]] += self.c
        out[: other.c.shape[0], : other.c.shape[1]] += other.c
        return _Poly2(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (other * -1.0)

    def __mul__(self, other):
        if not isinstance(other, _Poly2):
            return _Poly2(self.c * float(other))
        a, b = self.c, other.c
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
        for i in range(a.shape[0]):
            for j in range(a.shape[1]):
                if a[i, j] != 0.0:
                    out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
        return _Poly2(out)

    __rmul__ = __mul__

    def x_columns(self) -> list[np.ndarray]:
        """Coefficient-in-eps arrays, one per power of X."""
        return [self.c[:, j].copy() for j in range(self.c.shape[1])]

    def __call__(self, eps: float, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        epow = eps ** np.arange(self.c.shape[0])
        cx = epow @ self.c  # eps collapsed; polynomial in x remains
        out = np.zeros_like(x)
        for coeff in cx[::-1]:
            out = out * x + coeff
        return out


def _single_log_blocks(params: MinSeqParams) -> dict:
    """Polynomials in (eps, X_1) for the single-log sequence's densities."""
    N, m = params.N, params.m
    a1 = params.a[0]
    q0 = -(N - 4.0 - 2.0 * m) / 2.0
    A0 = q0 * (q0 + N - 2)
    E, X = _Poly2.eps(), _Poly2.x()
    eta = (a1 - 1.0) * X
    B = (a1 - 1.0) * (X * X)
    delta = (
        E * (2 * q0 + N - 2)
        + E * E
        + (q0 + (N - 2) / 2.0) * eta
        + E * eta
        + eta * eta * 0.25
        + B * 0.5
    )
    gamma = E + 0.5 * eta
    lap_sq_deficit = delta * (2 * A0) + delta * delta
    grad_sq_shift = gamma * (2 * q0) + gamma * gamma  # T_u^2 - q0^2
    t_v = E + 0.5 * eta
    lap_v = t_v * t_v + (N - 2) * t_v + 0.5 * B
    return {
        "X": X,
        "delta": delta,
        "lap_sq_deficit": lap_sq_deficit,
        "grad_sq_shift": grad_sq_shift,
        "t_u_sq": _Poly2.const(q0 * q0) + grad_sq_shift,
        "t_v_sq": t_v * t_v,
        "lap_v_sq": lap_v * lap_v,
    }


def _family_polys(family: ScanFamily, params: MinSeqParams):
    """Inner-region numerator and denominator as polynomials in (eps, X_1)."""
    N, m = params.N, params.m
    b = _single_log_blocks(params)
    X = b["X"]
    wgrad = ((N + 2 * m) / 2.0) ** 2

    if family in (ScanFamily.RELLICH_IMPROVED, ScanFamily.WEIGHTED_RELLICH_IMPROVED):
        return b["lap_sq_deficit"], X * X
    if family in (ScanFamily.RELLICH_GRAD_IMPROVED, ScanFamily.WEIGHTED_GRAD_IMPROVED):
        coeff = N * N / 4.0 if family is ScanFamily.RELLICH_GRAD_IMPROVED else wgrad
        return b["lap_sq_deficit"] - coeff * b["grad_sq_shift"], b["t_u_sq"] * (X * X)
    if family is ScanFamily.DEFICIT_VGRAD:
        return b["lap_sq_deficit"], b["t_v_sq"]
    if family is ScanFamily.DEFICIT_VLAP:
        return b["lap_sq_deficit"], b["lap_v_sq"]
    if family is ScanFamily.GRAD_DEFICIT_VGRAD:
        return b["lap_sq_deficit"] - (N * N / 4.0) * b["grad_sq_shift"], b["t_v_sq"]
    if family is ScanFamily.VLAP_RADIAL_EXCESS:
        return b["lap_v_sq"], 0.5 * b["t_v_sq"]
    if family is ScanFamily.GRAD_DEFICIT_VLAP:
        return b["lap_sq_deficit"] - (N * N / 4.0) * b["grad_sq_shift"], b["lap_v_sq"]
    raise DomainError(f"{family.value} has no reduced form")


_REDUCIBLE = {
    ScanFamily.RELLICH_IMPROVED,
    ScanFamily.WEIGHTED_RELLICH_IMPROVED,
    ScanFamily.RELLICH_GRAD_IMPROVED,
    ScanFamily.WEIGHTED_GRAD_IMPROVED,
    ScanFamily.DEFICIT_VGRAD,
    ScanFamily.DEFICIT_VLAP,
    ScanFamily.GRAD_DEFICIT_VGRAD,
    ScanFamily.VLAP_RADIAL_EXCESS,
    ScanFamily.GRAD_DEFICIT_VLAP,
}


def _q_beta(beta: float, eps: float, cutoff: CutoffSpec, spec: QuadratureSpec) -> float:
    """Q(beta) = int_0^1 r^{-1+2eps} X_1^beta phi^2 dr, stable for any eps > 0.

    The origin piece uses z = ln(1 - ln r):  int e^{-2 eps (e^z - 1)}
    e^{(1-beta) z} dz, which keeps slowly-decaying X-tails geometric even
    when eps is denormal.
    """
    log2eps = math.log(2.0 * eps)

    def h(z):
        t = log2eps + z
        damp = np.where(t < -36.0, 0.0, np.exp(np.minimum(t, 40.0)))
        factor = np.exp(-damp + 2.0 * eps)
        return factor * np.exp((1.0 - beta) * z)

    z0 = math.log(1.0 + math.log(1.0 / cutoff.inner_radius))
    res = integrate_halfline(h, z0, spec)

    def transition(r):
        x1 = 1.0 / (1.0 - np.log(r))
        return r ** (-1.0 + 2.0 * eps) * x1**beta * cutoff(r) ** 2

    tr = integrate(transition, cutoff.inner_radius, cutoff.outer_radius, spec)
    return res.value + tr.value


def _c_beta(beta: float, eps: float, cutoff: CutoffSpec, spec: QuadratureSpec) -> float:
    """C(beta) = int r^{2eps} X_1^beta (phi^2)' dr (transition zone only)."""

    def density(r):
        x1 = 1.0 / (1.0 - np.log(r))
        phi = cutoff(r)
        dphi = cutoff.derivative(r)
        return r ** (2.0 * eps) * x1**beta * 2.0 * phi * dphi

    res = integrate(density, cutoff.inner_radius, cutoff.outer_radius, spec)
    return res.value


def _reduce_columns(poly: _Poly2, a1: float, eps: float):
    """Rewrite sum_j col_j(eps) Q(-1+a+j) with the divergent levels removed.

    Returns (columns for j >= 2 as eps-polynomials, [(eps-poly, beta), ...])
    where each cutoff pair contributes -(1/2) * poly(eps) * C(beta).  The
    eliminated columns must vanish at eps = 0 (guaranteed by the sharp
    constants); the residual constant coefficient is pure round-off and is
    zeroed before dividing by eps.
    """
    cols = poly.x_columns()
    while len(cols) < 3:
        cols.append(np.zeros(1))
    cutoff_terms: list[tuple[np.ndarray, float]] = []
    for j in range(2):
        c = cols[j]
        scale = np.max(np.abs(c))
        if scale == 0.0:
            continue
        if abs(c[0]) > 1e-9 * scale:
            raise AssertionError(
                f"reduction failed: Q-level {j} coefficient does not vanish at eps=0"
            )
        cprime = c[1:].copy()
        if cprime.size == 0:
            continue
        beta = -1.0 + a1 + j
        nxt = cols[j + 1]
        size = max(nxt.size, cprime.size)
        merged = np.zeros(size)
        merged[: nxt.size] += nxt
        merged[: cprime.size] += (-beta / 2.0) * cprime
        cols[j + 1] = merged
        cutoff_terms.append((cprime, beta))
    return cols[2:], cutoff_terms


def _reduced_total(
    poly: _Poly2,
    params: MinSeqParams,
    spec: QuadratureSpec,
    q_cache: dict,
    c_cache: dict,
) -> float:
    a1 = params.a[0]
    eps = params.epsilon
    cutoff = params.cutoff
    cols, cut_terms = _reduce_columns(poly, a1, eps)
    total = 0.0
    for j, c in enumerate(cols, start=2):
        coeff = float(np.polynomial.polynomial.polyval(eps, c))
        if coeff == 0.0:
            continue
        beta = -1.0 + a1 + j
        if beta not in q_cache:
            q_cache[beta] = _q_beta(beta, eps, cutoff, spec)
        total += coeff * q_cache[beta]
    for c, beta in cut_terms:
        coeff = float(np.polynomial.polynomial.polyval(eps, c))
        if coeff == 0.0:
            continue
        if beta not in c_cache:
            c_cache[beta] = _c_beta(beta, eps, cutoff, spec)
        total += -0.5 * coeff * c_cache[beta]
    return total


def _transition_correction(
    poly: _Poly2,
    full_density,
    params: MinSeqParams,
    spec: QuadratureSpec,
) -> float:
    """Integral over the transition zone of (full density - w-form density).

    The w-form part (no cutoff derivatives) is already inside the Q(beta)
    integrals; this adds the genuinely cutoff-dependent remainder of the
    direct jet-evaluated density.
    """
    a1 = params.a[0]
    eps = params.epsilon

    def density(r):
        x1 = 1.0 / (1.0 - np.log(r))
        wform = (
            r ** (-1.0 + 2.0 * eps)
            * x1 ** (-1.0 + a1)
            * poly(eps, x1)
            * params.cutoff(r) ** 2
        )
        return full_density(r) - wform

    res = integrate(density, params.cutoff.inner_radius, params.cutoff.outer_radius, spec)
    return res.value


def _reduced_quantity(
    poly: _Poly2,
    full_density,
    params: MinSeqParams,
    spec: QuadratureSpec,
    q_cache: dict,
    c_cache: dict,
) -> float:
    """Full-domain integral of a single-log density given its w-form polynomial."""
    value = _reduced_total(poly, params, spec, q_cache, c_cache)
    return value + _transition_correction(poly, full_density, params, spec)


def _rayleigh_reduced(family: ScanFamily, params: MinSeqParams, spec: QuadratureSpec) -> float:
    num_poly, den_poly = _family_polys(family, params)
    _, outer = _family_densities(family, params, 1)
    q_cache: dict = {}
    c_cache: dict = {}
    num = _reduced_quantity(num_poly, lambda r: outer(r)[0], params, spec, q_cache, c_cache)
    den = _reduced_quantity(den_poly, lambda r: outer(r)[1], params, spec, q_cache, c_cache)
    if abs(den) <= spec.abs_tol:
        raise QuadratureError("degenerate denominator in Rayleigh quotient")
    return num / den


def rayleigh_quotient(
    family: ScanFamily,
    params: MinSeqParams,
    K_series: int | None = None,
    quad: QuadratureSpec | None = None,
) -> float:
    """Evaluate one Rayleigh quotient of the family at the given parameters.

    K_series is the number of correction terms subtracted in the numerator
    (defaults to the number of log factors carried by the sequence).  The
    single-log quotients go through the exact identity-reduced form, which
    stays accurate at arbitrarily small eps; multi-log quotients and the
    per-mode family use direct two-region quadrature.
    """
    spec = quad or QuadratureSpec()
    K = len(params.a) if K_series is None else int(K_series)
    if K < 1:
        raise DomainError("K_series must be >= 1")
    if K == 1 and len(params.a) == 1 and family in _REDUCIBLE:
        _family_densities(family, params, K)  # shared parameter validation
        return _rayleigh_reduced(family, params, spec)
    inner, outer = _family_densities(family, params, K)
    s0 = math.log(1.0 / params.cutoff.inner_radius)

    num_res = integrate_halfline(lambda s: inner(s)[0], s0, spec)
    den_res = integrate_halfline(lambda s: inner(s)[1], s0, spec)
    lo, hi = params.cutoff.inner_radius, params.cutoff.outer_radius
    num_out = integrate(lambda r: outer(r)[0], lo, hi, spec)
    den_out = integrate(lambda r: outer(r)[1], lo, hi, spec)
    num = num_res.value + num_out.value
    den = den_res.value + den_out.value
    if abs(den) <= spec.abs_tol:
        raise QuadratureError("degenerate denominator in Rayleigh quotient")
    return num / den


@dataclass
class ScanResult:
    family: ScanFamily
    schedule: list[MinSeqParams]
    quotients: list[float]
    theoretical: float
    extrapolated: float
    monotone: bool

    def direction_ok(self, slack: float = 1e-9) -> bool:
        return all(q >= self.theoretical - slack and np.isfinite(q) for q in self.quotients)

    def aitken_extrapolated(self) -> float | None:
        """Aitken delta-squared acceleration of the last three iterates.

        Diagnostic only (log-rate convergence breaks its assumptions); never
        used for pass/fail decisions.
        """
        q = self.quotients
        if len(q) < 3:
            return None
        d1, d2 = q[-1] - q[-2], q[-2] - q[-3]
        denom = d1 - d2
        if abs(denom) < 1e-300:
            return q[-1]
        return q[-1] - d1 * d1 / denom


def scan_to_limit(
    family: ScanFamily,
    schedule: list[MinSeqParams],
    quad: QuadratureSpec | None = None,
    K_series: int | None = None,
) -> ScanResult:
    """Run the quotient along a parameter schedule (eps first, then the a_i).

    Quotients must stay above the theoretical constant; non-monotone scans
    are flagged through ``monotone`` rather than treated as fatal.
    """
    if not schedule:
        raise DomainError("empty schedule")
    theoretical = scan_theoretical(family, schedule[0])
    quotients = [rayleigh_quotient(family, p, K_series, quad) for p in schedule]
    monotone = all(
        quotients[i + 1] <= quotients[i] + 1e-6 for i in range(len(quotients) - 1)
    )
    return ScanResult(
        family=family,
        schedule=list(schedule),
        quotients=quotients,
        theoretical=theoretical,
        extrapolated=quotients[-1],
        monotone=monotone,
    )


_DEFAULT_EPS_STEPS = (1e-2, 3e-3, 1e-3, 3e-4)
_MIN_EPS = 5e-324  # smallest positive double; the reduced quotient is exact there


def _eps_for_a(a: float) -> float:
    """An eps deep enough that the eps-limit is effectively exhausted at this a.

    The quotients converge like 1/Q with Q ~ (1/a)(1 - (2 eps)^a); keeping
    a * ln(1/eps) large makes the a-decay visible.  Floors at the smallest
    positive double, which the reduced evaluation handles exactly.
    """
    t = 6.0 / a
    return max(math.exp(-t), _MIN_EPS) if t < 700.0 else _MIN_EPS


def default_schedule(
    family: ScanFamily,
    N: int,
    m: float = 0.0,
    mode_k: int = 0,
    K: int = 1,
    cutoff: CutoffSpec | None = None,
    halvings: int = 8,
) -> list[MinSeqParams]:
    """The default limit path: eps down the fixed ladder, then halve each a_i.

    During the a-halvings, eps keeps shrinking with a (the limit order is
    eps first, then a_1, ..., a_K: each a-step should see an exhausted
    eps-limit, otherwise the quotient stalls at the ln(1/eps) scale).
    """
    cutoff = cutoff or CutoffSpec()
    if family is ScanFamily.AMN:
        return [
            MinSeqParams(N, m, eps, (1.0,), cutoff, mode_k) for eps in _DEFAULT_EPS_STEPS
        ]
    if K > 1:
        halvings = min(halvings, 2)
    a = [0.1] * K
    steps = [MinSeqParams(N, m, eps, tuple(a), cutoff, mode_k) for eps in _DEFAULT_EPS_STEPS]
    for i in range(K):
        for _ in range(halvings):
            a[i] /= 2.0
            eps = _eps_for_a(min(a[: i + 1])) if K == 1 else _DEFAULT_EPS_STEPS[-1]
            steps.append(MinSeqParams(N, m, eps, tuple(a), cutoff, mode_k))
    return steps


class AsymptoticCase(Enum):
    """Leading-term checks for the single-log sequence as eps, a_1 -> 0."""

    V_GRADIENT = "v-gradient"
    V_LAPLACIAN = "v-laplacian"
    U_GRADIENT = "u-gradient-over-x2"
    U_LAPLACIAN = "u-laplacian"
    RELLICH_DEFICIT = "rellich-deficit"
    GRAD_RELLICH_DEFICIT = "gradrellich-deficit"


def leading_order_asymptotics(
    which: AsymptoticCase,
    params: MinSeqParams,
    quad: QuadratureSpec | None = None,
) -> tuple[float, float, float]:
    """(lhs, rhs_leading, ratio) for one displayed leading-order asymptotic.

    lhs is the stated functional of the sequence member divided by the sphere
    area; rhs_leading is the displayed coefficient times the singular
    integrals it multiplies.  The ratio tends to 1 as eps, a_1 -> 0 jointly,
    with the leading term dominating only once a_1 ln(1/eps) is large; the
    deficit cases are evaluated through the identity-reduced form so that
    regime is reachable.
    """
    spec = quad or QuadratureSpec()
    if len(params.a) != 1:
        raise DomainError("asymptotic checks use the single-log sequence (K = 1)")
    if params.m != 0.0 or params.mode_k != 0:
        raise DomainError("asymptotic checks use m = 0 and the radial mode")
    N = params.N
    a1 = params.a[0]
    eps = params.epsilon
    cutoff = params.cutoff
    blocks = _single_log_blocks(params)
    outer_terms = _OuterTerms(params, 1)
    rellich = (N * (N - 4) / 4.0) ** 2
    q_cache: dict = {}
    c_cache: dict = {}

    def q_beta(beta: float) -> float:
        if beta not in q_cache:
            q_cache[beta] = _q_beta(beta, eps, cutoff, spec)
        return q_cache[beta]

    def reduced(poly_key: str, full_density) -> float:
        return _reduced_quantity(
            blocks[poly_key], full_density, params, spec, q_cache, c_cache
        )

    def direct(kind: str) -> float:
        if eps < 1e-120:
            raise DomainError(
                "this functional grows like (2 eps)^{a-2} and exceeds the double"
                " range at such eps; use a moderate eps for it"
            )

        def inner_density(s):
            t = _InnerTerms(params, s, 1)
            return t.common * (t.T_u**2 if kind == "u_grad" else t.lap_u**2)

        s0 = math.log(1.0 / cutoff.inner_radius)
        inner_val = integrate_halfline(inner_density, s0, spec).value
        outer_val = integrate(
            lambda r: outer_terms.pieces(r)["grad_u" if kind == "u_grad" else "lap_u"],
            cutoff.inner_radius,
            cutoff.outer_radius,
            spec,
        ).value
        return inner_val + outer_val

    lead = (1.0 - a1) / 4.0 * q_beta(1.0 + a1)

    if which is AsymptoticCase.V_GRADIENT:
        lhs = reduced("t_v_sq", lambda r: outer_terms.pieces(r)["grad_v"])
        rhs = lead
    elif which is AsymptoticCase.V_LAPLACIAN:
        lhs = reduced("lap_v_sq", lambda r: outer_terms.pieces(r)["lap_v"])
        rhs = (N - 2) ** 2 * lead
    elif which is AsymptoticCase.U_GRADIENT:
        lhs = direct("u_grad")
        rhs = lead + ((N - 4) / 2.0) ** 2 * q_beta(-1.0 + a1)
    elif which is AsymptoticCase.U_LAPLACIAN:
        lhs = direct("u_lap")
        rhs = (1.0 - a1) / 8.0 * (N * N - 4 * N + 8) * q_beta(1.0 + a1) + rellich * q_beta(
            -1.0 + a1
        )
    elif which is AsymptoticCase.RELLICH_DEFICIT:
        lhs = reduced(
            "lap_sq_deficit",
            lambda r: (p := outer_terms.pieces(r))["lap_u"] - rellich * p["hardy_u"],
        )
        rhs = (1.0 - a1) / 8.0 * (N * N - 4 * N + 8) * q_beta(1.0 + a1)
    elif which is AsymptoticCase.GRAD_RELLICH_DEFICIT:
        poly = blocks["lap_sq_deficit"] - (N * N / 4.0) * blocks["grad_sq_shift"]
        lhs = _reduced_quantity(
            poly,
            lambda r: (p := outer_terms.pieces(r))["lap_u"] - (N * N / 4.0) * p["grad_u"],
            params,
            spec,
            q_cache,
            c_cache,
        )
        rhs = (1.0 - a1) / 16.0 * (N - 4) ** 2 * q_beta(1.0 + a1)
    else:  # pragma: no cover
        raise DomainError(f"unknown case {which}")
    return lhs, rhs, lhs / rhs


def scan_result_csv(result: ScanResult) -> str:
    """Serialize a scan as CSV: step, epsilon, a_1..a_K, quotient, theoretical."""
    K = max(len(p.a) for p in result.schedule)
    buf = io.StringIO()
    header = ["step", "epsilon"] + [f"a{i+1}" for i in range(K)] + ["quotient", "theoretical"]
    buf.write(",".join(header) + "\n")
    for i, (p, qv) in enumerate(zip(result.schedule, result.quotients)):
        row = [str(i), f"{p.epsilon:.17g}"]
        row += [f"{ai:.17g}" for ai in p.a] + [""] * (K - len(p.a))
        row += [f"{qv:.17g}", f"{result.theoretical:.17g}"]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()
