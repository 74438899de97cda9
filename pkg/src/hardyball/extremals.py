"""
Explicit extremals of the Hardy-Sobolev quotient on R^n and test-function energies.

The extremal profile is

    U(r) = (r^{a} + r^{b})^{-(n-2)/(2-s)},   a = (2-s) beta_- / (n-2),  b = (2-s) beta_+ / (n-2),

so that ``U ~ r^{-beta_-}`` at 0 and ``U ~ r^{-beta_+}`` at infinity.  In the
variable ``x = r^{d}``, ``d = b - a``, every integral of U reduces to a Beta
function, which is why quadrature here is done in ``log x``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import BubbleUnresolved, RegimeError, ResidualTooLarge
from .params import ProblemParams, classify_regime, compute_exponents, unit_sphere_area
from .radial import DEFAULT_R0_FRACTION

CHI_TOL = 1e-8
_LOG_SPAN = 40.0  # quadrature runs over |log x| <= _LOG_SPAN, tails added analytically


@dataclass(frozen=True)
class ExtremalShape:
    a: float  # U = (r^a + r^b)^{-c}
    b: float
    c: float
    d: float  # b - a

    @classmethod
    def of(cls, p: ProblemParams) -> "ExtremalShape":
        e = compute_exponents(p)
        k = (2.0 - p.s) / (p.n - 2)
        a, b = k * e.beta_minus, k * e.beta_plus
        return cls(a=a, b=b, c=(p.n - 2) / (2.0 - p.s), d=b - a)


def _profile(p: ProblemParams, r):
    """U, U', U'' at r > 0 by direct differentiation of the closed form."""
    sh = ExtremalShape.of(p)
    r = np.asarray(r, dtype=float)
    f = r**sh.a + r**sh.b
    f1 = sh.a * r ** (sh.a - 1) + sh.b * r ** (sh.b - 1)
    f2 = sh.a * (sh.a - 1) * r ** (sh.a - 2) + sh.b * (sh.b - 1) * r ** (sh.b - 2)
    c = sh.c
    u = f**-c
    du = -c * f ** (-c - 1) * f1
    d2u = c * (c + 1) * f ** (-c - 2) * f1 * f1 - c * f ** (-c - 1) * f2
    return u, du, d2u


def eval_U(p: ProblemParams, r):
    """The extremal profile ``U(r)``; ``r = 0`` gives the finite limit when ``beta_- <= 0``.

    Examples
    --------
    >>> eval_U(ProblemParams(4, 0.0), 1.0)
    0.5
    """
    r_arr = np.asarray(r, dtype=float)
    e = compute_exponents(p)
    with np.errstate(divide="ignore"):
        out = np.asarray(_profile(p, np.where(r_arr > 0, r_arr, 1.0))[0])
    if np.any(r_arr == 0.0):
        if e.beta_minus > 0:
            raise ValueError("U is unbounded at r = 0 when beta_- > 0")
        out = np.where(r_arr == 0.0, 1.0 if e.beta_minus == 0 else 0.0, out)
    return float(out) if np.ndim(r) == 0 else out


def eval_U_eps(p: ProblemParams, eps: float, r):
    """Rescaled extremal ``eps^{-(n-2)/2} U(r/eps)``."""
    r = np.asarray(r, dtype=float)
    return eps ** (-(p.n - 2) / 2.0) * eval_U(p, r / eps)


def _eps_derivs(p: ProblemParams, eps: float, r):
    u, du, _ = _profile(p, r / eps)
    k = eps ** (-(p.n - 2) / 2.0)
    return k * u, k * du / eps


def hardy_operator_on_U(p: ProblemParams, r) -> np.ndarray:
    """``-U'' - (n-1)U'/r - gamma U/r^2`` by analytic differentiation.

    U is written as ``r^{-beta} (1 + r^delta)^{-c}`` with ``(beta, delta) = (beta_-, d)``
    for r < 1 and ``(beta_+, -d)`` for r >= 1.  Since ``r^{-beta}`` is annihilated
    by the operator, only derivatives of the bounded factor remain and the large
    terms never cancel.
    """
    sh = ExtremalShape.of(p)
    e = compute_exponents(p)
    r = np.asarray(r, dtype=float)
    small = r < 1.0
    beta = np.where(small, e.beta_minus, e.beta_plus)
    delta = np.where(small, sh.d, -sh.d)
    c = sh.c
    x = r**delta
    g1 = -c * delta * r ** (delta - 1) * (1 + x) ** (-c - 1)
    g2 = (-c * delta * (delta - 1) * r ** (delta - 2) * (1 + x) ** (-c - 1)
          + c * (c + 1) * delta**2 * r ** (2 * delta - 2) * (1 + x) ** (-c - 2))
    return -(r**-beta) * (g2 + (p.n - 1 - 2 * beta) * g1 / r)


def chi_residual(p: ProblemParams, chi: float, r) -> np.ndarray:
    """Relative residual of ``-U'' - (n-1)U'/r - gamma U/r^2 = chi U^{p-1} r^{-s}``."""
    r = np.asarray(r, dtype=float)
    u = _profile(p, r)[0]
    pexp = compute_exponents(p).two_star_s
    lhs = hardy_operator_on_U(p, r)
    rhs = chi * u ** (pexp - 1) * r ** (-p.s)
    return np.abs(lhs - rhs) / np.abs(rhs)


def compute_chi(p: ProblemParams, samples: int = 50) -> float:
    """Coupling constant for which ``U`` solves the critical equation on R^n.

    Fitted at r = 1 and checked on ``samples`` radii in ``[1e-3, 1e3]``.

    Examples
    --------
    >>> round(compute_chi(ProblemParams(4, 0.0)), 12)
    8.0
    """
    u = _profile(p, 1.0)[0]
    pexp = compute_exponents(p).two_star_s
    chi = float(hardy_operator_on_U(p, 1.0) / u ** (pexp - 1))
    res = chi_residual(p, chi, np.geomspace(1e-3, 1e3, samples))
    if not np.all(res < CHI_TOL):
        raise ResidualTooLarge(f"extremal equation residual {res.max():.3g} exceeds {CHI_TOL}")
    return chi


def _log_x_integral(fn, lo_tail: float, hi_tail: float) -> float:
    """``int fn(t) dt`` over the real line; quadrature on ``|t| <= _LOG_SPAN`` plus the
    analytic tail values ``lo_tail`` and ``hi_tail`` beyond it."""
    pieces = np.linspace(-_LOG_SPAN, _LOG_SPAN, 9)
    total = 0.0
    for t0, t1 in zip(pieces[:-1], pieces[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(fn, t0, t1, epsabs=1e-17, epsrel=1e-13, limit=200)
        total += val
    return total + lo_tail + hi_tail


def _log1pexp(t):
    return np.logaddexp(0.0, t)


def _whole_space_integrals(p: ProblemParams) -> tuple[float, float]:
    """(int |grad U|^2 - gamma U^2/|x|^2, int U^p |x|^{-s}) over R^n, without the sphere factor.

    With ``x = r^d`` and ``beta_- beta_+ = gamma`` the integrands in ``t = log x`` are

        gradient:    gap x^c (1+x)^{-2c-2} (beta_+ x^2 - beta_-) / d
        constraint:  x^alpha (1+x)^{-2 alpha} / d,       alpha = (n-s)/(2-s),
    """
    sh = ExtremalShape.of(p)
    e = compute_exponents(p)
    c, d = sh.c, sh.d
    alpha = (p.n - p.s) / (2.0 - p.s)

    def grad(t):
        w = math.exp(c * t - (2 * c + 2) * _log1pexp(t))
        return e.gap * w * (e.beta_plus * math.exp(2 * t) - e.beta_minus) / d

    def constraint(t):
        return math.exp(alpha * t - 2 * alpha * _log1pexp(t)) / d

    x0 = math.exp(-_LOG_SPAN)
    num = _log_x_integral(grad, -e.beta_minus * x0**c, e.beta_plus * x0**c)
    tail = x0**alpha / (alpha * d)
    den = _log_x_integral(constraint, tail, tail)
    return num, den


def mu_rn_source(p: ProblemParams) -> str:
    """How :func:`compute_mu_rn` obtains its value for these parameters."""
    if not classify_regime(p).truly_singular:
        return "sobolev_value"
    if p.gamma < 0.0:
        return "radial_profile"
    return "explicit_extremal"


def compute_mu_rn(p: ProblemParams) -> float:
    """Best constant of the Hardy-Sobolev quotient on R^n.

    In the merely singular regime the Hardy term does not change the constant
    and the ``gamma = 0, s = 0`` value is returned.  For ``gamma < 0 < s`` the
    quotient of the closed-form radial profile is returned (see :func:`mu_rn_source`).

    Examples
    --------
    >>> round(compute_mu_rn(ProblemParams(3, 0.0)), 3)
    5.478
    """
    if not classify_regime(p).truly_singular:
        p = p.with_(gamma=0.0, s=0.0)
    pexp = compute_exponents(p).two_star_s
    num, den = _whole_space_integrals(p)
    omega = unit_sphere_area(p.n)
    return omega ** (1.0 - 2.0 / pexp) * num / den ** (2.0 / pexp)


def norm_ratio_u2(p: ProblemParams) -> float:
    """``|U|_2^2 / (int U^p |x|^{-s})^{2/p}``; the coefficient of ``eps^2`` when ``gap > 2``."""
    e = compute_exponents(p)
    if e.gap <= 2.0:
        raise RegimeError("U is not square integrable unless beta_+ - beta_- > 2")
    sh = ExtremalShape.of(p)
    c, d = sh.c, sh.d
    pexp = e.two_star_s
    lo = (e.gap + 2.0) / d  # U^2 r^n ~ x^lo at 0 and ~ x^{-hi} at infinity
    hi = (e.gap - 2.0) / d

    def l2(t):
        return math.exp(lo * t - 2 * c * _log1pexp(t)) / d

    x0 = math.exp(-_LOG_SPAN)
    l2_val = _log_x_integral(l2, x0**lo / (lo * d), x0**hi / (hi * d))
    den = _whole_space_integrals(p)[1]
    omega = unit_sphere_area(p.n)
    return omega ** (1.0 - 2.0 / pexp) * l2_val / den ** (2.0 / pexp)


# ---------------------------------------------------------------------------
# test functions on the ball
# ---------------------------------------------------------------------------


def smooth_cutoff(r, inner: float, outer: float):
    """C^2 quintic step: 1 on ``[0, inner]``, 0 beyond ``outer``; returns (eta, eta')."""
    r = np.asarray(r, dtype=float)
    t = np.clip((r - inner) / (outer - inner), 0.0, 1.0)
    step = t**3 * (10 - 15 * t + 6 * t * t)
    dstep = 30 * t * t * (1 - t) ** 2 / (outer - inner)
    return 1.0 - step, -dstep


@dataclass
class TestFunctionSpec:
    eps: float
    cutoff_radius: float
    correction: Optional[object] = None  # a SingularSolution (needs .regular_part)
    correction_weight: float = 0.0

    __test__ = False  # not a pytest class


@dataclass
class EnergyBreakdown:
    gradient: float
    potential: float  # int (gamma/|x|^2 + lam) u^2
    constraint: float  # int |u|^p |x|^{-s}
    energy: float

    __test__ = False


def make_test_function(p: ProblemParams, eps: float, cutoff_radius: Optional[float] = None,
                       with_correction: Optional[bool] = None) -> TestFunctionSpec:
    """Spec for ``eta U_eps`` plus, in the low-dimensional case, ``eps^{gap/2}(H - eta r^{-beta_+})``."""
    e = compute_exponents(p)
    rho = p.ball_radius
    cutoff_radius = rho / 3.0 if cutoff_radius is None else cutoff_radius
    if with_correction is None:
        with_correction = e.gap < 2.0
    corr = None
    weight = 0.0
    if with_correction:
        from .mass import interior_mass

        corr = interior_mass(p, check_sign=False).solution
        weight = eps ** (e.gap / 2.0)
    return TestFunctionSpec(eps=eps, cutoff_radius=cutoff_radius, correction=corr, correction_weight=weight)


def _test_function(p: ProblemParams, spec: TestFunctionSpec, r):
    e = compute_exponents(p)
    eta, deta = smooth_cutoff(r, spec.cutoff_radius, 2.0 * spec.cutoff_radius)
    ue, due = _eps_derivs(p, spec.eps, r)
    u = eta * ue
    du = deta * ue + eta * due
    if spec.correction is not None:
        # H - eta r^{-beta_+} = (H - r^{-beta_+}) + (1 - eta) r^{-beta_+}
        reg, dreg = spec.correction.regular_part(r)
        sing = r ** (-e.beta_plus)
        dsing = -e.beta_plus * r ** (-e.beta_plus - 1)
        u = u + spec.correction_weight * (reg + (1.0 - eta) * sing)
        du = du + spec.correction_weight * (dreg - deta * sing + (1.0 - eta) * dsing)
    return u, du


def energy_of_test_function(p: ProblemParams, spec: TestFunctionSpec) -> EnergyBreakdown:
    """Quotient ``J(u_eps)`` on the ball of radius ``p.ball_radius`` with linear term ``p.lam``.

    Integrals are taken in ``log r`` with breakpoints at ``eps`` and the cutoff
    edges; the region below ``r_min`` (chosen so the neglected piece is below
    round-off for the leading power laws) is dropped.
    """
    e = compute_exponents(p)
    rho = p.ball_radius
    r0 = DEFAULT_R0_FRACTION * rho
    if spec.eps < 10.0 * r0:
        raise BubbleUnresolved(f"eps={spec.eps:.3g} is below 10 r0 = {10 * r0:.3g}")
    if spec.eps > spec.cutoff_radius / 4.0:
        raise BubbleUnresolved(f"eps={spec.eps:.3g} is not small against the cutoff {spec.cutoff_radius:.3g}")
    pexp = e.two_star_s
    slow = min(e.gap, (p.n - p.s) * e.gap / (p.n - 2))
    if spec.correction is not None:
        slow = min(slow, 2.0 - e.gap)
    r_min = spec.eps * math.exp(-36.0 / slow)
    r_min = max(r_min, 1e-250 ** (1.0 / max(e.beta_plus, 1.0)))

    def integrands(t):
        r = math.exp(t)
        u, du = _test_function(p, spec, r)
        w = r**p.n
        return du * du * w, (p.gamma / (r * r) + p.lam) * u * u * w, abs(u) ** pexp * r ** (-p.s) * w

    cuts = sorted({math.log(r_min), math.log(spec.eps * 1e-3), math.log(spec.eps), math.log(spec.eps * 1e3),
                   math.log(spec.cutoff_radius), math.log(2.0 * spec.cutoff_radius), math.log(rho)})
    cuts = [c for c in cuts if math.log(r_min) <= c <= math.log(rho)]
    totals = np.zeros(3)
    with warnings.catch_warnings():
        # relative 1e-13 on tiny tail pieces trips the round-off detector harmlessly
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for k in range(3):
            for t0, t1 in zip(cuts[:-1], cuts[1:]):
                val, _ = integrate.quad(lambda t: integrands(t)[k], t0, t1, epsabs=0.0, epsrel=1e-13, limit=400)
                totals[k] += val
    omega = unit_sphere_area(p.n)
    grad, pot, con = omega * totals
    energy = (grad - pot) / con ** (2.0 / pexp)
    return EnergyBreakdown(gradient=grad, potential=pot, constraint=con, energy=energy)


@dataclass
class SlopeFit:
    leading_power: float
    slope: float
    stderr: float
    eps: np.ndarray
    excess: np.ndarray  # J(u_eps) - mu_RN


def _power_columns(eps: np.ndarray, powers) -> np.ndarray:
    """Columns ``eps^q``; a power repeating an earlier one gets a ``log(1/eps)`` companion."""
    cols, seen = [], []
    for q in powers:
        if any(abs(q - o) < 1e-6 for o in seen):
            cols.append(eps**q * np.log(1.0 / eps))
        else:
            cols.append(eps**q)
        seen.append(q)
    return np.column_stack(cols)


def expansion_slope(p: ProblemParams, ks=range(6, 13), mu_rn: Optional[float] = None) -> SlopeFit:
    """Least-squares coefficient of the leading power in ``J(u_eps) - mu_RN`` over ``eps = 2^-k``.

    Low dimensions fit ``eps^gap`` with ``eps^2`` and ``eps^{gap+1}`` as corrections,
    the borderline fits ``eps^2 log(1/eps)`` with ``eps^2`` and higher dimensions
    fit ``eps^2`` with ``eps^{min(gap, 4)}``.
    """
    e = compute_exponents(p)
    mu_rn = compute_mu_rn(p) if mu_rn is None else mu_rn
    eps = np.array([2.0**-k for k in ks])
    excess = np.array([energy_of_test_function(p, make_test_function(p, x)).energy for x in eps]) - mu_rn
    if e.gap < 2.0 - 1e-12:
        power = e.gap
        basis = _power_columns(eps, [e.gap, 2.0, e.gap + 1.0])
    elif abs(e.gap - 2.0) <= 1e-12:
        power = 2.0
        basis = np.column_stack([eps**2 * np.log(1 / eps), eps**2])
    else:
        power = 2.0
        basis = _power_columns(eps, [2.0, min(e.gap, 4.0)])
    scaled = basis / basis[:, :1]
    rhs = excess / basis[:, 0]
    coef, *_ = np.linalg.lstsq(scaled, rhs, rcond=None)
    resid = rhs - scaled @ coef
    dof = max(len(eps) - basis.shape[1], 1)
    cov = np.linalg.pinv(scaled.T @ scaled) * (resid @ resid) / dof
    return SlopeFit(power, float(coef[0]), float(math.sqrt(cov[0, 0])), eps, excess)
