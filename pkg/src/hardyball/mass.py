"""
Hardy-singular interior mass of the ball and the threshold it determines.

For ``-Delta u - (gamma/|x|^2 + h) u = 0`` on ``B_rho`` with ``beta_+ - beta_- < 2``
the positive solution vanishing on the sphere is

    H = y_+ + m y_-,     y_+- ~ r^{-beta_+-} at 0,

and the mass is the ratio ``m`` of the two coefficients.  The branches come
from Frobenius series continued by an ODE solver, so no regression is
involved; a regression over an inner window is kept as a diagnostic.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize, special

from .errors import (
    NoAdmissibleBetaPrime,
    NoSignChange,
    NotCoercive,
    PoleCrossing,
    RegimeError,
    SignViolation,
)
from .oracles import first_bessel_zero, lambda_star_ball_oracle
from .params import ProblemParams, classify_regime, compute_exponents
from .radial import (
    Branch,
    Grading,
    PotentialLike,
    RadialFunction,
    RadialGrid,
    as_potential,
    frobenius_solve,
    make_grid,
)

GAP_EXCLUSION = 1e-8


class ThresholdMethod(enum.Enum):
    MASS_BISECTION = "MassBisection"
    JANELLI_EIGEN = "JanelliEigen"
    BESSEL_ORACLE = "BesselOracle"
    CLOSED_FORM_MERELY = "ClosedFormMerely"


@dataclass
class SingularSolution:
    """``H = c1 y_+ + c2 y_-`` as a callable profile."""

    plus: object
    minus: object
    c1: float
    c2: float

    def evaluate(self, r):
        yp, dp = self.plus.evaluate(r)
        ym, dm = self.minus.evaluate(r)
        return self.c1 * yp + self.c2 * ym, self.c1 * dp + self.c2 * dm

    def __call__(self, r):
        return self.evaluate(r)[0]

    def regular_part(self, r):
        """``H - c1 r^{-beta_+}`` and its derivative, accurate down to r -> 0."""
        yp, dp = self.plus.remainder(r)
        ym, dm = self.minus.evaluate(r)
        return self.c1 * yp + self.c2 * ym, self.c1 * dp + self.c2 * dm


@dataclass
class MassResult:
    c1: float
    c2: float
    mass: float
    fit_window: tuple
    fit_residual: float
    regression_mass: float = math.nan
    solution: Optional[SingularSolution] = field(default=None, repr=False)


@dataclass
class ThresholdReport:
    lambda_star: float
    method: ThresholdMethod
    bracket: tuple
    cross_residuals: dict
    note: str = ""


def _require_low_dimensional(p: ProblemParams):
    e = compute_exponents(p)
    if e.gap >= 2.0 - GAP_EXCLUSION:
        raise RegimeError(
            f"interior mass needs beta_+ - beta_- < 2 (got {e.gap:.10g}); "
            "at or above 2 the mass is not defined"
        )
    return e


def _regression_mass(p: ProblemParams, plus, minus, h, H_end_slope: float, window: tuple):
    """Integrate from the boundary inward and fit ``c1 y_+ + c2 y_-`` over ``window``."""
    n, gamma = p.n, p.gamma
    rho = p.ball_radius

    def rhs(t, y):
        r = math.exp(t)
        return [y[1], -(n - 2) * y[1] - (gamma + r * r * float(h(r))) * y[0]]

    ts = np.linspace(math.log(window[0]), math.log(window[1]), 40)
    sol = integrate.solve_ivp(rhs, (math.log(rho), ts[0]), [0.0, rho * H_end_slope],
                              method="DOP853", rtol=1e-12, atol=1e-14, t_eval=ts[::-1])
    rs = np.exp(sol.t)
    vals = sol.y[0]
    basis = np.column_stack([plus(rs), minus(rs)])
    coef, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    resid = np.linalg.norm(basis @ coef - vals) / np.linalg.norm(vals)
    return coef[1] / coef[0], float(resid)


def interior_mass(p: ProblemParams, h: PotentialLike = None, grid: Optional[RadialGrid] = None,
                  check_coercive: bool = True, check_sign: bool = True) -> MassResult:
    """Mass of the ball for the potential ``h`` (defaults to the constant ``p.lam``).

    Examples
    --------
    >>> round(interior_mass(ProblemParams(3, 0.0, lam=1.0)).mass, 10)
    -0.6420926159
    """
    _require_low_dimensional(p)
    hpol = as_potential(p.lam if h is None else h)
    rho = p.ball_radius
    if check_coercive:
        from .spectral import lambda1

        lam1 = lambda1(p, h=hpol).value
        if lam1 <= 1e-8:
            raise NotCoercive(f"-Delta - gamma/|x|^2 - h has first eigenvalue {lam1:.6g} <= 0")
    plus = frobenius_solve(p, hpol, Branch.PLUS)
    minus = frobenius_solve(p, hpol, Branch.MINUS)
    yp_end, dyp_end = plus.evaluate(rho)
    ym_end, dym_end = minus.evaluate(rho)
    m = -yp_end / ym_end
    H = SingularSolution(plus, minus, 1.0, m)

    if check_sign:
        grid = grid or make_grid(rho, 400, Grading.GEOMETRIC)
        vals = H(grid.nodes[:-1])
        if np.any(vals <= 0.0):
            bad = grid.nodes[np.argmax(vals <= 0.0)]
            raise SignViolation(f"singular solution is not positive (first failure near r={bad:.4g})")

    window = (0.02 * rho, 0.2 * rho)
    reg_mass, reg_resid = _regression_mass(p, plus, minus, hpol, dyp_end + m * dym_end, window)
    return MassResult(c1=1.0, c2=m, mass=m, fit_window=window, fit_residual=reg_resid,
                      regression_mass=reg_mass, solution=H)


def mass_oracle_bessel(p: ProblemParams, lam: float) -> float:
    """Closed-form mass for constant ``h = lam``; Bessel functions of order ``nu = gap/2``.

    ``-(J_{-nu}(k)/J_nu(k)) (k/2)^{2nu} Gamma(1-nu)/Gamma(1+nu)`` with ``k = sqrt(lam) rho``,
    scaled by ``rho^{-gap}`` for a ball of radius ``rho``.
    """
    e = _require_low_dimensional(p)
    rho = p.ball_radius
    nu = e.nu
    if lam <= 0.0:
        if lam == 0.0:
            return -(rho ** -e.gap)
        raise ValueError("the Bessel oracle is written for lam >= 0")
    k = math.sqrt(lam) * rho
    if k >= first_bessel_zero(nu):
        raise PoleCrossing(f"sqrt(lam) rho = {k:.6g} is past the first zero of J_{nu:.6g}")
    ratio = special.jv(-nu, k) / special.jv(nu, k)
    m = -ratio * (k / 2.0) ** (2 * nu) * special.gamma(1 - nu) / special.gamma(1 + nu)
    return float(m * rho ** -e.gap)


def lambda_star_by_mass(p: ProblemParams, grid: Optional[RadialGrid] = None,
                        cross_check: bool = True) -> ThresholdReport:
    """Zero of ``lam -> mass(lam)`` on ``(1e-6 lam1, 0.999 lam1)``.

    The mass is strictly increasing in ``lam``, negative at 0 and unbounded
    near ``lam1``, so the zero is unique.  The result is the threshold under the
    standing proviso that the infimum is not attained at the threshold itself.
    """
    from .spectral import janelli_lambda_star, lambda1

    e = _require_low_dimensional(p)
    lam1 = lambda1(p, grid).value
    lo, hi = 1e-6 * lam1, 0.999 * lam1

    def f(lam):
        return interior_mass(p.with_(lam=lam), check_coercive=False, check_sign=False).mass

    flo, fhi = f(lo), f(hi)
    if not (flo < 0.0 < fhi):
        raise NoSignChange(f"mass({lo:.4g})={flo:.4g}, mass({hi:.4g})={fhi:.4g}: no sign change")
    root, info = optimize.brentq(f, lo, hi, xtol=1e-8 * lam1, rtol=1e-15, full_output=True)
    bracket = (root - 1e-8 * lam1, root + 1e-8 * lam1)
    cross = {}
    if cross_check:
        oracle = lambda_star_ball_oracle(e.nu, p.ball_radius)
        cross[ThresholdMethod.BESSEL_ORACLE.value] = abs(root - oracle) / oracle
        jan = janelli_lambda_star(p).value
        cross[ThresholdMethod.JANELLI_EIGEN.value] = abs(root - jan) / jan
    note = "" if classify_regime(p).truly_singular else "merely singular parameters: mass zero reported for reference"
    return ThresholdReport(lambda_star=root, method=ThresholdMethod.MASS_BISECTION,
                           bracket=bracket, cross_residuals=cross, note=note)


def lambda_star_merely_singular_highdim(p: ProblemParams) -> float:
    """``inf |gamma|/|x|^2`` over the ball, i.e. ``|gamma|/rho^2`` (n >= 4, s = 0, gamma < 0)."""
    if p.s != 0.0 or p.gamma > 0.0:
        raise RegimeError("closed-form threshold applies to s = 0, gamma <= 0 only")
    if p.n < 4:
        raise RegimeError("closed-form threshold is for n >= 4; n = 3 goes through the Robin mass")
    if p.gamma == 0.0:
        raise RegimeError("closed-form threshold is stated for gamma < 0")
    return abs(p.gamma) / p.ball_radius**2


# ---------------------------------------------------------------------------
# Pohozaev identity
# ---------------------------------------------------------------------------


def boundary_slope(u: RadialFunction) -> float:
    """u'(rho) from the quadratic through the last three nodes."""
    r = u.grid.nodes[-3:]
    v = u.values[-3:]
    c = np.polyfit(r - r[-1], v, 2)
    return float(c[1])


def pohozaev_terms(p: ProblemParams, u: RadialFunction) -> tuple[float, float]:
    """``(lam int u^2, (rho/2) omega rho^{n-1} u'(rho)^2)`` for a radial solution vanishing at rho."""
    from .radial import quadrature
    from .params import unit_sphere_area

    rho = p.ball_radius
    sq = RadialFunction(u.grid, u.values**2, 2.0 * u.leading_power)
    bulk = p.lam * quadrature(sq, 0.0, p.n)
    du = boundary_slope(u)
    boundary = 0.5 * rho * unit_sphere_area(p.n) * rho ** (p.n - 1) * du * du
    return bulk, boundary


def pohozaev_residual(p: ProblemParams, u: RadialFunction, mu: float = 0.0) -> float:
    """Relative defect of the dilation identity for radial solutions of the critical equation.

    Pairing the equation with ``x . grad u`` makes the gradient, Hardy and critical
    terms cancel (``mu`` drops out) and leaves ``lam int u^2 = (rho/2) int_{sphere} u_r^2``.
    """
    bulk, boundary = pohozaev_terms(p, u)
    scale = max(abs(bulk), abs(boundary))
    if scale == 0.0:
        return 0.0
    return abs(bulk - boundary) / scale


# ---------------------------------------------------------------------------
# sub- and supersolutions near the origin; entire solutions
# ---------------------------------------------------------------------------


class SolutionSign(enum.Enum):
    SUPER = "super"
    SUB = "sub"
    NONE = "none"


@dataclass
class SubSuperReport:
    beta: float
    beta_prime: float
    mu: float
    delta: float
    verified: bool
    sign: SolutionSign
    min_value: float
    max_value: float
    radii: np.ndarray = field(repr=False, default=None)
    values: np.ndarray = field(repr=False, default=None)


def _operator_on_trial(p: ProblemParams, a: float, theta: float, beta: float, beta_p: float, mu: float, r):
    """``-Delta u - (gamma + a r^theta) u / r^2`` for ``u = r^{-beta} + mu r^{-beta'}``."""
    k_p = beta_p * (p.n - 2 - beta_p) - p.gamma
    k = beta * (p.n - 2 - beta) - p.gamma
    return (k * r ** (-beta - 2) - a * r ** (theta - beta - 2)
            + mu * (k_p * r ** (-beta_p - 2) - a * r ** (theta - beta_p - 2)))


def _pick_beta_prime(p: ProblemParams, beta: float, theta: float) -> tuple[float, float]:
    if not 0.0 < theta:
        raise NoAdmissibleBetaPrime(f"theta must be positive, got {theta}")
    for frac in (0.5, 0.3, 0.7, 0.2, 0.8):
        bp = beta - frac * theta
        k_p = bp * (p.n - 2 - bp) - p.gamma
        if abs(k_p) > 1e-6:
            return bp, k_p
    raise NoAdmissibleBetaPrime("every candidate beta' is an indicial root")


def subsupersolution_check(p: ProblemParams, theta: float, beta_choice: Branch = Branch.PLUS,
                           sign: SolutionSign = SolutionSign.SUPER, a: float = 1.0,
                           r_max: Optional[float] = None, samples: int = 100) -> SubSuperReport:
    """Build ``u = r^{-beta} + mu r^{-beta'}`` with ``0 < beta - beta' < theta`` for ``c = gamma + a r^theta``.

    ``mu`` is signed so that ``mu K'`` (``K' = beta'(n-2-beta') - gamma``) has the sign of the
    requested inequality; its size is scanned to make the interval ``(0, delta)``
    on which the sign holds (and ``u > 0``) as long as possible.  The sign is then
    verified at ``samples`` radii.  ``sign=NONE`` takes ``mu = 0`` and reports the
    raw residual, which vanishes identically when ``a = 0``.
    """
    e = compute_exponents(p)
    beta = e.beta_plus if Branch(beta_choice) is Branch.PLUS else e.beta_minus
    beta_p, k_p = _pick_beta_prime(p, beta, theta)
    r_max = r_max or p.ball_radius
    probe = np.geomspace(1e-12 * r_max, r_max, 2000)
    sign = SolutionSign(sign)

    if sign is SolutionSign.NONE:
        vals = _operator_on_trial(p, a, theta, beta, beta_p, 0.0, probe)
        scale = np.abs(probe ** (-beta - 2))
        rel = vals / scale
        return SubSuperReport(beta, beta_p, 0.0, 0.0, bool(np.all(np.abs(rel) < 1e-12)), sign,
                              float(rel.min()), float(rel.max()), probe, vals)

    want = 1.0 if sign is SolutionSign.SUPER else -1.0
    mu_sign = want * math.copysign(1.0, k_p)

    def delta_for(mag):
        mu = mu_sign * mag
        vals = _operator_on_trial(p, a, theta, beta, beta_p, mu, probe)
        u = probe ** (-beta) + mu * probe ** (-beta_p)
        ok = (want * vals > 0.0) & (u > 0.0)
        if not ok[0]:
            return 0.0
        bad = np.nonzero(~ok)[0]
        return r_max if len(bad) == 0 else float(probe[bad[0] - 1])

    mags = np.geomspace(1e-3, 1e3, 61)
    deltas = [delta_for(m) for m in mags]
    best = int(np.argmax(deltas))
    mu = mu_sign * mags[best]
    delta = deltas[best]
    radii = np.geomspace(1e-8 * delta, delta, samples) if delta > 0 else np.array([])
    vals = _operator_on_trial(p, a, theta, beta, beta_p, mu, radii)
    u = radii ** (-beta) + mu * radii ** (-beta_p)
    verified = bool(delta > 0 and np.all(want * vals > 0.0) and np.all(u > 0.0))
    return SubSuperReport(beta, beta_p, mu, delta, verified, sign,
                          float(vals.min()) if len(vals) else math.nan,
                          float(vals.max()) if len(vals) else math.nan, radii, vals)


@dataclass
class EntireFit:
    coef_minus: float
    coef_plus: float
    residual: float


def entire_solution_fit(p: ProblemParams, u1: float, du1: float,
                        r_range: tuple = (1e-3, 1e3), samples: int = 200) -> EntireFit:
    """Integrate ``-Delta u = gamma u/|x|^2`` on R^n from data at r = 1 and fit
    ``c_- r^{-beta_-} + c_+ r^{-beta_+}`` to the trajectory."""
    e = compute_exponents(p)
    n, gamma = p.n, p.gamma

    def rhs(t, y):
        return [y[1], -(n - 2) * y[1] - gamma * y[0]]

    ts = np.linspace(math.log(r_range[0]), math.log(r_range[1]), samples)
    kw = dict(method="DOP853", rtol=1e-13, atol=1e-300, dense_output=True)
    right = integrate.solve_ivp(rhs, (0.0, ts[-1]), [u1, du1], **kw)
    left = integrate.solve_ivp(rhs, (0.0, ts[0]), [u1, du1], **kw)
    vals = np.where(ts >= 0.0, right.sol(np.maximum(ts, 0.0))[0], left.sol(np.minimum(ts, 0.0))[0])
    r = np.exp(ts)
    basis = np.column_stack([r ** -e.beta_minus, r ** -e.beta_plus])
    # rows scaled so every radius counts equally
    scale = np.abs(basis).sum(axis=1)
    coef, *_ = np.linalg.lstsq(basis / scale[:, None], vals / scale, rcond=None)
    resid = np.max(np.abs(basis @ coef - vals) / np.abs(vals))
    return EntireFit(float(coef[0]), float(coef[1]), float(resid))
