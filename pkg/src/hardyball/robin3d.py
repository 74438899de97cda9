"""
Robin (internal) mass of the 3-d ball for the merely singular case ``gamma <= 0``.

The Green function of ``L = -Delta - gamma/|x|^2 - lam`` with pole ``x0`` is written

    G(x) = 1/(4 pi d) - k0^2 d / (8 pi) + w(x),     d = |x - x0|,  k0^2 = V(x0),

where ``V = gamma/|x|^2 + lam``.  The second term removes the ``1/d`` part of the
source, so ``w`` solves ``L w = (V - k0^2)/(4 pi d) - V k0^2 d/(8 pi)`` with a bounded
right-hand side and ``w = -(first two terms)`` on the sphere.  With the
normalisation ``G = (1/4pi)(1/d + R) + o(1)`` the Robin mass is ``R = 4 pi w(x0)``.

The pole sits on the symmetry axis, so the problem is axisymmetric.  It is
discretised by cell-centred finite volumes on a spherical ``(r, theta)`` grid of
the meridian half-disk.  The potential is radial, hence the discrete operator
separates: the angular part is diagonalised once per grid and every solve
reduces to one tridiagonal radial system per angular mode.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate, interpolate, linalg, optimize

from .errors import BubbleUnresolved, NoSignChange, NotCoercive, PoleTooCloseToOrigin, RegimeError
from .extremals import EnergyBreakdown, SlopeFit, _power_columns
from .mass import ThresholdMethod, ThresholdReport
from .oracles import lambda1_ball_oracle, sobolev_constant
from .params import ProblemParams

DEFAULT_CELLS = 256
POLE_CLEARANCE = 5  # grid spacings kept between a pole and the origin when gamma < 0


@dataclass(frozen=True)
class AxiGrid:
    """Cell-centred grid on the meridian half-disk ``{(r, theta): r < radius, 0 < theta < pi}``.

    Cylindrical coordinates of the cell centres are ``rho_cyl = r sin(theta)`` and
    ``z = r cos(theta)``.  Row ``0`` of ``theta`` touches the positive ``z``-axis,
    the last row touches the negative one.
    """

    n_r: int = DEFAULT_CELLS
    n_theta: int = DEFAULT_CELLS
    radius: float = 1.0

    def __post_init__(self):
        if self.n_r < 4 or self.n_theta < 4:
            raise ValueError("AxiGrid needs at least 4 cells per direction")
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def dr(self) -> float:
        return self.radius / self.n_r

    @property
    def dtheta(self) -> float:
        return math.pi / self.n_theta

    @property
    def spacing(self) -> float:
        """Largest cell diameter, ``max(dr, radius * dtheta)``."""
        return max(self.dr, self.radius * self.dtheta)

    @property
    def r_faces(self) -> np.ndarray:
        return np.linspace(0.0, self.radius, self.n_r + 1)

    @property
    def theta_faces(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.n_theta + 1)

    @property
    def r_centers(self) -> np.ndarray:
        f = self.r_faces
        return 0.5 * (f[1:] + f[:-1])

    @property
    def theta_centers(self) -> np.ndarray:
        f = self.theta_faces
        return 0.5 * (f[1:] + f[:-1])

    @property
    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """``(rho_cyl, z)`` of the cell centres, each of shape ``(n_r, n_theta)``."""
        r, t = np.meshgrid(self.r_centers, self.theta_centers, indexing="ij")
        return r * np.sin(t), r * np.cos(t)

    @property
    def axis_mask(self) -> np.ndarray:
        m = np.zeros((self.n_r, self.n_theta), dtype=bool)
        m[:, 0] = m[:, -1] = True
        return m

    @property
    def boundary_mask(self) -> np.ndarray:
        m = np.zeros((self.n_r, self.n_theta), dtype=bool)
        m[-1, :] = True
        return m

    @property
    def volumes(self) -> np.ndarray:
        """Cell volumes of the solid of revolution."""
        f, c = self.r_faces, np.cos(self.theta_faces)
        return 2 * math.pi * np.outer(np.diff(f**3) / 3.0, c[:-1] - c[1:])

    def refined(self, factor: int = 2) -> "AxiGrid":
        return AxiGrid(self.n_r * factor, self.n_theta * factor, self.radius)


BUBBLE_GRID = AxiGrid(2048, 64)


@dataclass
class RobinResult:
    pole_radius: float
    robin_mass: float
    grid_spacings: tuple  # (coarse, fine) cell sizes; equal when not extrapolated
    extrapolated: bool
    error_bar: float = math.nan
    raw: tuple = ()  # per-grid values before extrapolation


@dataclass
class GreenField:
    """A discrete Green function on the unit ball (coordinates scaled by the radius)."""

    grid: AxiGrid
    pole: float  # signed z-coordinate of the pole, unit ball
    k0sq: float
    w: np.ndarray  # (n_r, n_theta) cell values of the regular part
    boundary: np.ndarray  # w on the sphere at the theta centres
    _spline: Optional[object] = field(default=None, repr=False)

    def singular(self, d):
        return 1.0 / (4 * math.pi * d) - self.k0sq * d / (8 * math.pi)

    def regular(self, rho_cyl, z):
        """Interpolated ``w`` at points of the unit ball."""
        if self._spline is None:
            self._spline = _field_spline(self.grid, self.w, self.boundary)
        r = np.hypot(rho_cyl, z)
        theta = np.arctan2(rho_cyl, z)
        return self._spline(r, theta, grid=False)

    def __call__(self, rho_cyl, z):
        d = np.hypot(rho_cyl, z - self.pole)
        return self.singular(d) + self.regular(rho_cyl, z)


def _field_spline(grid: AxiGrid, w: np.ndarray, boundary: np.ndarray):
    # pad with the centre value, the sphere values and mirrored rows across the axis
    r = np.concatenate([[0.0], grid.r_centers / grid.radius, [1.0]])
    centre = _centre_value(w)
    body = np.vstack([np.full(grid.n_theta, centre), w, boundary])
    t = grid.theta_centers
    t_pad = np.concatenate([-t[1::-1], t, 2 * math.pi - t[:-3:-1]])
    b_pad = np.hstack([body[:, 1::-1], body, body[:, :-3:-1]])
    return interpolate.RectBivariateSpline(r, t_pad, b_pad, kx=3, ky=3)


def _centre_value(w: np.ndarray) -> float:
    # even extension through the origin: w(0) ~ (9 w_0 - w_1)/8 averaged over angles
    return float(np.mean(9 * w[0] - w[1]) / 8.0)


def _axis_extrapolate(w: np.ndarray) -> np.ndarray:
    return (9 * w[:, 0] - w[:, 1]) / 8.0


@lru_cache(maxsize=8)
def _angular_modes(n_theta: int):
    """Generalised eigen-decomposition of the angular stiffness against ``diag(dcos)``."""
    tf = np.linspace(0.0, math.pi, n_theta + 1)
    dcos = np.cos(tf[:-1]) - np.cos(tf[1:])
    dth = math.pi / n_theta
    t = np.sin(tf[1:-1]) / dth  # face transmissibilities
    diag = np.zeros(n_theta)
    diag[:-1] += t
    diag[1:] += t
    s = 1.0 / np.sqrt(dcos)
    sig, q = linalg.eigh_tridiagonal(diag * s * s, -t * s[:-1] * s[1:])
    sig[0] = max(sig[0], 0.0)  # the constant mode; removes roundoff
    return dcos, s, sig, q


class _AxiOperator:
    """Factorised ``-Delta - V`` on an ``AxiGrid`` of the unit ball, ``V = gamma/r^2 + lam``."""

    def __init__(self, grid: AxiGrid, gamma: float, lam: float):
        self.grid = AxiGrid(grid.n_r, grid.n_theta, 1.0)
        self.gamma, self.lam = gamma, lam
        g = self.grid
        f = g.r_faces
        h = g.dr
        self.cell_r3 = np.diff(f**3) / 3.0
        self.cell_v = gamma * h + lam * self.cell_r3  # int V r^2 dr per cell
        off = f[1:-1] ** 2 / h
        diag = np.zeros(g.n_r)
        diag[:-1] += off
        diag[1:] += off
        diag[-1] += 2.0 / h  # Dirichlet face at r = 1, half-cell distance
        self.bc_weight = 2.0 / h
        self.off = -off
        self.dcos, self.s, self.sig, self.q = _angular_modes(g.n_theta)
        # batched Thomas factorisation, one column per angular mode
        a = (diag - self.cell_v)[:, None] + h * self.sig[None, :]
        c = np.empty_like(a)
        c[0] = a[0]
        for i in range(1, g.n_r):
            c[i] = a[i] - self.off[i - 1] ** 2 / c[i - 1]
        if np.any(c <= 0):
            raise NotCoercive(f"discrete operator is not positive definite at gamma={gamma}, lam={lam}")
        self.piv = c

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve for cell values given integrated sources ``rhs`` (already divided by 2 pi)."""
        b = (rhs * self.s[None, :]) @ self.q
        n = self.grid.n_r
        y = np.empty_like(b)
        y[0] = b[0]
        for i in range(1, n):
            y[i] = b[i] - self.off[i - 1] / self.piv[i - 1] * y[i - 1]
        y[-1] /= self.piv[-1]
        for i in range(n - 2, -1, -1):
            y[i] = (y[i] - self.off[i] * y[i + 1]) / self.piv[i]
        return (y @ self.q.T) * self.s[None, :]

    def solve_radial(self, rhs: np.ndarray) -> np.ndarray:
        """The constant angular mode only (sources and data independent of theta)."""
        n = self.grid.n_r
        y = np.array(rhs, dtype=float)
        c = self.piv[:, 0]
        for i in range(1, n):
            y[i] -= self.off[i - 1] / c[i - 1] * y[i - 1]
        y[-1] /= c[-1]
        for i in range(n - 2, -1, -1):
            y[i] = (y[i] - self.off[i] * y[i + 1]) / c[i]
        return y


@lru_cache(maxsize=16)
def _operator(n_r: int, n_theta: int, gamma: float, lam: float) -> _AxiOperator:
    return _AxiOperator(AxiGrid(n_r, n_theta), gamma, lam)


def _lambda1(gamma: float) -> float:
    return lambda1_ball_oracle(math.sqrt(0.25 - gamma))


def _validate(gamma: float, lam: float, grid: AxiGrid):
    if gamma > 0:
        raise RegimeError("the Robin mass is computed for the merely singular case gamma <= 0")
    lam_unit = lam * grid.radius**2
    if lam_unit >= _lambda1(gamma):
        raise NotCoercive(f"lam = {lam} is not below the first eigenvalue {_lambda1(gamma) / grid.radius**2}")
    return lam_unit


def _green_field(gamma: float, lam_unit: float, pole: float, grid: AxiGrid) -> GreenField:
    """Regular part on the unit ball for a pole at signed height ``pole`` on the axis."""
    op = _operator(grid.n_r, grid.n_theta, gamma, lam_unit)
    g = op.grid
    a = abs(pole)
    k0sq = lam_unit + (gamma / a**2 if gamma != 0.0 else 0.0)
    rc, tc = g.r_centers, g.theta_centers
    if a == 0.0:
        d = rc
        # integrated source per unit dcos; the V factor is integrated exactly
        sing = 1.0 / (4 * math.pi * d) - k0sq * d / (8 * math.pi)
        rhs = op.cell_v * sing - k0sq * op.cell_r3 / (4 * math.pi * d)
        g_bc = -(1.0 / (4 * math.pi) - k0sq / (8 * math.pi))
        rhs[-1] += op.bc_weight * g_bc
        y = op.solve_radial(rhs)
        w = np.repeat(y[:, None], g.n_theta, axis=1)
        return GreenField(grid, 0.0, k0sq, w, np.full(g.n_theta, g_bc))
    r, t = np.meshgrid(rc, tc, indexing="ij")
    d = np.sqrt(r * r + pole * pole - 2 * r * pole * np.cos(t))
    sing = 1.0 / (4 * math.pi * d) - k0sq * d / (8 * math.pi)
    rhs = (op.cell_v[:, None] * sing - k0sq * op.cell_r3[:, None] / (4 * math.pi * d)) * op.dcos[None, :]
    db = np.sqrt(1.0 + pole * pole - 2 * pole * np.cos(tc))
    g_bc = -(1.0 / (4 * math.pi * db) - k0sq * db / (8 * math.pi))
    rhs[-1] += op.bc_weight * g_bc * op.dcos
    w = op.solve(rhs)
    return GreenField(grid, pole, k0sq, w, g_bc)


def _point_value(gf: GreenField, pole: float) -> float:
    """``w`` at the pole: extrapolate to the axis, then a cubic spline in ``r``."""
    g = gf.grid
    if pole == 0.0:
        return _centre_value(gf.w)
    col = gf.w if pole > 0 else gf.w[:, ::-1]
    axis = _axis_extrapolate(col)
    bc = gf.boundary[0] if pole > 0 else gf.boundary[-1]
    r = np.concatenate([g.r_centers / g.radius, [1.0]])
    spline = interpolate.CubicSpline(r, np.concatenate([axis, [bc]]))
    return float(spline(abs(pole)))


def _robin_single(gamma: float, lam_unit: float, a: float, grid: AxiGrid, axis: int = 1) -> float:
    gf = _green_field(gamma, lam_unit, axis * a, grid)
    return 4 * math.pi * _point_value(gf, axis * a) / grid.radius


def robin_mass_at(gamma: float, lam: float, pole_radius: float, grid: Optional[AxiGrid] = None,
                  extrapolate: bool = True, axis: int = 1) -> RobinResult:
    """Robin mass ``R`` of the ball at a pole on the symmetry axis.

    Parameters
    ----------
    gamma, lam
        ``gamma <= 0`` and ``lam`` below the first Dirichlet eigenvalue.
    pole_radius
        Distance of the pole from the centre, ``0 <= pole_radius < radius``.  The
        centre is allowed only for ``gamma = 0``, where the problem is radial.
    grid
        Coarse grid; the Richardson partner has twice the cells in each direction.
    axis
        ``+1`` puts the pole on the positive ``z``-axis, ``-1`` on the negative one.

    Returns
    -------
    RobinResult
        ``R`` under ``G = (1/4pi)(1/|x - x0| + R) + o(1)``.  With ``extrapolate`` the
        two grid values are combined assuming second-order convergence and
        ``error_bar`` is a third of their difference.
    """
    grid = grid or AxiGrid()
    lam_unit = _validate(gamma, lam, grid)
    a = pole_radius / grid.radius
    if not 0.0 <= a < 1.0:
        raise ValueError(f"pole_radius must lie in [0, {grid.radius})")
    if gamma < 0 and a < POLE_CLEARANCE * grid.dr / grid.radius:
        raise PoleTooCloseToOrigin(
            f"pole at {pole_radius} is within {POLE_CLEARANCE} grid spacings of the Hardy singularity")
    coarse = _robin_single(gamma, lam_unit, a, grid, axis)
    if not extrapolate:
        return RobinResult(pole_radius, coarse, (grid.spacing, grid.spacing), False, math.nan, (coarse,))
    fine_grid = grid.refined()
    fine = _robin_single(gamma, lam_unit, a, fine_grid, axis)
    value = (4 * fine - coarse) / 3.0
    return RobinResult(pole_radius, value, (grid.spacing, fine_grid.spacing), True,
                       abs(fine - coarse) / 3.0, (coarse, fine))


def robin_sup(gamma: float, lam: float, grid: Optional[AxiGrid] = None, extrapolate: bool = True,
              tol: float = 1e-4) -> tuple[float, float]:
    """Supremum of the Robin mass over poles, as ``(value, argmax radius)``.

    By rotational symmetry only the distance to the centre matters.  A coarse
    scan locates the best bracket, golden-section search refines it, and for
    ``gamma = 0`` the centre itself is included.
    """
    grid = grid or AxiGrid()
    _validate(gamma, lam, grid)

    def f(a):
        return robin_mass_at(gamma, lam, a, grid, extrapolate=extrapolate).robin_mass

    lo = 0.0 if gamma == 0 else POLE_CLEARANCE * grid.dr
    hi = grid.radius * (1 - POLE_CLEARANCE / grid.n_r)
    xs = np.linspace(lo, hi, 13)
    vals = [f(x) for x in xs]
    k = int(np.argmax(vals))
    a, b = xs[max(k - 1, 0)], xs[min(k + 1, len(xs) - 1)]
    x, v = _golden_max(f, a, b, tol * grid.radius)
    if vals[k] >= v:
        x, v = xs[k], vals[k]
    return float(v), float(x)


def _golden_max(f, a: float, b: float, tol: float) -> tuple[float, float]:
    inv = (math.sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def lambda_star_merely_singular_3d(gamma: float, grid: Optional[AxiGrid] = None,
                                   extrapolate: bool = True, xtol: float = 1e-6) -> ThresholdReport:
    """Threshold ``sup{lam : sup_x0 R(x0) <= 0}`` by root finding on ``lam -> robin_sup``.

    The sup is increasing in ``lam``, negative at ``lam = 0`` and unbounded as
    ``lam`` approaches the first eigenvalue.  At ``gamma = 0`` the closed form
    ``(pi/2)^2 / radius^2`` is attached as a cross-check.
    """
    grid = grid or AxiGrid()
    if gamma > 0:
        raise RegimeError("the merely singular threshold needs gamma <= 0")
    lam1 = _lambda1(gamma) / grid.radius**2

    def f(lam):
        return robin_sup(gamma, lam, grid, extrapolate=extrapolate)[0]

    lo, hi = 1e-6 * lam1, (1 - 1e-4) * lam1
    flo, fhi = f(lo), f(hi)
    if not (flo < 0 < fhi):
        raise NoSignChange(f"robin_sup does not change sign on ({lo}, {hi}): {flo}, {fhi}")
    root = optimize.brentq(f, lo, hi, xtol=xtol * lam1, rtol=4 * np.finfo(float).eps)
    cross, note = {}, ""
    if gamma == 0:
        exact = (math.pi / 2) ** 2 / grid.radius**2
        cross[ThresholdMethod.CLOSED_FORM_MERELY.value] = abs(root - exact) / exact
    else:
        note = "no closed form for gamma < 0; compare with the gamma = 0 value as a lower bound"
    return ThresholdReport(float(root), ThresholdMethod.MASS_BISECTION, (lo, hi), cross, note)


# --- off-centre bubbles -------------------------------------------------------------


def _cutoff(d, inner: float, outer: float):
    """Quintic step with two derivatives: 1 below ``inner``, 0 beyond ``outer``."""
    d = np.asarray(d, dtype=float)
    w = outer - inner
    t = np.clip((d - inner) / w, 0.0, 1.0)
    eta = 1.0 - t**3 * (10 - 15 * t + 6 * t * t)
    d1 = -30 * t * t * (1 - t) ** 2 / w
    d2 = -60 * t * (1 - t) * (1 - 2 * t) / w**2
    return eta, d1, d2


def _sphere_mean_inverse_square(a: float, d):
    """Mean of ``1/|x|^2`` over the sphere ``|x - x0| = d`` with ``|x0| = a > d``."""
    return np.log((a + d) / (a - d)) / (2 * a * d)


def _gauss_pieces(edges, order: int = 8):
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = np.asarray(edges[:-1]), np.asarray(edges[1:])
    half = 0.5 * (hi - lo)[:, None]
    pts = (0.5 * (hi + lo))[:, None] + half * x[None, :]
    return pts.ravel(), (half * w[None, :]).ravel()


def energy_of_offcenter_bubble(p: ProblemParams, x0_radius: float, eps: float,
                               grid: Optional[AxiGrid] = None) -> EnergyBreakdown:
    """Energy of a Green-corrected bubble centred at ``x0`` on the axis.

    The test function is

        u = eta U_eps + sqrt(eps) psi,   psi = 4 pi G - eta / d,

    with ``U_eps = sqrt(eps) / sqrt(eps^2 + d^2)`` (the standard bubble at scale
    ``eps``), ``G`` the Green function with pole ``x0`` and ``eta`` a cutoff in
    ``d = |x - x0|``.  Then ``u`` vanishes on the sphere, ``psi`` is bounded and
    ``L psi = (eta'' + V eta)/d``, which turns the quadratic form into integrals
    without derivatives of ``psi``.  Radial pieces use adaptive quadrature; the
    rest uses Gauss rules in polar coordinates about ``x0`` and cell sums.

    Raises
    ------
    BubbleUnresolved
        If ``eps`` is below five grid spacings or above a quarter of the cutoff.
    """
    if p.n != 3 or p.s != 0 or p.gamma > 0:
        raise RegimeError("off-centre bubbles are defined for n = 3, s = 0, gamma <= 0")
    grid = grid or AxiGrid()
    rad = grid.radius
    lam_unit = _validate(p.gamma, p.lam, grid)
    a = x0_radius / rad
    e = eps / rad
    if p.gamma < 0 and a < POLE_CLEARANCE * grid.dr / rad:
        raise PoleTooCloseToOrigin(f"bubble centre {x0_radius} too close to the origin")
    delta = 0.9 * (min(a, 1 - a) if a > 0 else 1.0)
    if e < POLE_CLEARANCE * grid.dr / rad or e > delta / 4:
        raise BubbleUnresolved(f"eps = {eps} outside [{POLE_CLEARANCE * grid.dr}, {delta * rad / 4}]")
    gamma = p.gamma
    gf = _green_field(gamma, lam_unit, a, grid)
    inner, outer = delta / 2, delta

    def vbar(d):
        if a == 0.0:
            return lam_unit + gamma / (d * d)
        return lam_unit + gamma * _sphere_mean_inverse_square(a, d)

    def phi(d):
        return _cutoff(d, inner, outer)[0] * math.sqrt(e) / np.sqrt(e * e + d * d)

    def dphi(d):
        eta, d1, _ = _cutoff(d, inner, outer)
        b = math.sqrt(e) / np.sqrt(e * e + d * d)
        return d1 * b - eta * b * d / (e * e + d * d)

    def f_src(d):
        eta, _, d2 = _cutoff(d, inner, outer)
        return (d2 + vbar(d) * eta) / d

    breaks = [0.0, e / 4, e, 4 * e, 16 * e, inner, outer]
    breaks = sorted(set(b for b in breaks if b <= outer))

    def radial(fn):
        total = 0.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            for lo, hi in zip(breaks[:-1], breaks[1:]):
                total += integrate.quad(fn, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)[0]
        return 4 * math.pi * total

    grad_phi = radial(lambda d: dphi(d) ** 2 * d * d)
    pot_phi = radial(lambda d: vbar(d) * phi(d) ** 2 * d * d)
    cross = 2 * math.sqrt(e) * radial(lambda d: phi(d) * f_src(d) * d * d)
    p6_phi = radial(lambda d: phi(d) ** 6 * d * d)

    # polar rule about x0 on d < outer: graded in d, Gauss-Legendre in cos
    edges = np.unique(np.concatenate([[0.0], np.geomspace(e * 1e-3, outer, 80), [inner]]))
    dq, dw = _gauss_pieces(edges)
    cq, cw = np.polynomial.legendre.leggauss(48)
    D, C = np.meshgrid(dq, cq, indexing="ij")
    Wt = 2 * math.pi * np.outer(dw * dq * dq, cw)
    rho_c, z = D * np.sqrt(1 - C * C), a + D * C
    eta, _, d2 = _cutoff(D, inner, outer)
    psi = (1 - eta) / D - gf.k0sq * D / 2 + 4 * math.pi * gf.regular(rho_c, z)
    ph = eta * math.sqrt(e) / np.sqrt(e * e + D * D)
    v = lam_unit + gamma / (rho_c**2 + z**2)
    u = ph + math.sqrt(e) * psi
    psi_f = float(np.sum(Wt * psi * (d2 + v * eta) / D))
    p6_near = float(np.sum(Wt * (u**6 - ph**6)))
    pot_near = float(np.sum(Wt * v * (u * u - ph * ph)))

    # outside the cutoff ball u = sqrt(eps) 4 pi G; cell sums are enough at order eps^3
    rho_g, z_g = grid.nodes
    rho_g, z_g = rho_g / rad, z_g / rad
    far = np.hypot(rho_g, z_g - a) >= outer
    G = gf.singular(np.hypot(rho_g, z_g - a)) + gf.w
    vol = grid.volumes / rad**3
    u_far = math.sqrt(e) * 4 * math.pi * G[far]
    r_g = np.hypot(rho_g, z_g)[far]
    p6_far = float(np.sum(vol[far] * u_far**6))
    pot_far = float(np.sum(vol[far] * (lam_unit + gamma / r_g**2) * u_far**2))

    quad_form = grad_phi - pot_phi + cross + e * psi_f
    potential = pot_phi + pot_near + pot_far
    constraint = p6_phi + p6_near + p6_far
    # scaling to the ball of radius rad: the quotient is dilation invariant
    energy = quad_form / constraint ** (1.0 / 3.0)
    return EnergyBreakdown(gradient=(quad_form + potential) / rad, potential=potential / rad,
                           constraint=constraint, energy=float(energy))


def offcenter_expansion_slope(p: ProblemParams, x0_radius: float, grid: Optional[AxiGrid] = None,
                              eps_values=None) -> SlopeFit:
    """Fit ``J(u_eps) - S = A eps + eps^2 (B + C log(1/eps))``; return ``A`` and its error.

    ``A`` is a negative multiple of the Robin mass at ``x0``.  The default grid
    is fine in ``r`` and coarse in ``theta`` so that small ``eps`` are admissible.
    """
    grid = grid or BUBBLE_GRID
    a = x0_radius / grid.radius
    delta = 0.9 * (min(a, 1 - a) if a > 0 else 1.0) * grid.radius
    if eps_values is None:
        lo = 1.05 * POLE_CLEARANCE * grid.dr
        eps_values = np.geomspace(lo, min(delta / 4.5, 0.06 * grid.radius), 8)
    eps = np.asarray(eps_values, dtype=float)
    S = sobolev_constant(3)
    excess = np.array([energy_of_offcenter_bubble(p, x0_radius, x, grid).energy for x in eps]) - S
    cols = _power_columns(eps, [1.0, 2.0, 2.0])
    scale = np.abs(cols).max(axis=0)
    coef, *_ = np.linalg.lstsq(cols / scale, excess, rcond=None)
    resid = excess - (cols / scale) @ coef
    dof = max(len(eps) - cols.shape[1], 1)
    cov = np.linalg.inv((cols / scale).T @ (cols / scale)) * float(resid @ resid) / dof
    return SlopeFit(1.0, float(coef[0] / scale[0]), float(math.sqrt(cov[0, 0]) / scale[0]), eps, excess)


# --- Green function bounds ----------------------------------------------------------


@dataclass
class GreenBoundReport:
    pole_radius: float
    max_ratio: float  # sup over the sample of G / bound shape
    min_interior_ratio: float  # inf over sample points at distance >= 0.1 from the sphere
    near_pole_ratio: float  # ratio three grid spacings above the pole on the axis
    all_positive: bool
    samples: int

    @property
    def passed(self) -> bool:
        return (self.all_positive and math.isfinite(self.max_ratio)
                and 0 < self.min_interior_ratio <= self.max_ratio)


def green_bound_check(gamma: float, lam: float, pole_radius: float, grid: Optional[AxiGrid] = None,
                      samples: int = 200, seed: int = 0) -> GreenBoundReport:
    """Sample ``G_p(x)`` against the shape ``(max{|p|,|x|}/min{|p|,|x|})^{beta_-} |x - p|^{-1}``.

    Points are drawn uniformly from the meridian half-disk, avoiding three grid
    spacings around the origin and the pole.  ``G`` is the singular part plus
    the interpolated regular part from the axisymmetric solve.
    """
    grid = grid or AxiGrid()
    lam_unit = _validate(gamma, lam, grid)
    a = pole_radius / grid.radius
    if not 0.0 < a < 1.0:
        raise ValueError("pole_radius must lie strictly inside the ball")
    if gamma < 0 and a < POLE_CLEARANCE * grid.dr / grid.radius:
        raise PoleTooCloseToOrigin(f"pole at {pole_radius} too close to the origin")
    gf = _green_field(gamma, lam_unit, a, grid)
    beta_minus = 0.5 - math.sqrt(0.25 - gamma)
    keep = 3 * grid.spacing / grid.radius
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < samples:
        rho_c, z = rng.uniform(0, 1), rng.uniform(-1, 1)
        r = math.hypot(rho_c, z)
        if r < 1 and r > keep and math.hypot(rho_c, z - a) > keep:
            pts.append((rho_c, z))
    rho_c, z = np.array(pts).T
    r = np.hypot(rho_c, z)
    d = np.hypot(rho_c, z - a)
    G = gf(rho_c, z) / grid.radius
    shape = (np.maximum(r, a) / np.minimum(r, a)) ** beta_minus / (d * grid.radius)
    ratio = G / shape
    interior = r <= 0.9
    zn = a + keep if a + keep < 1 else a - keep
    near = gf(0.0, zn) * keep * (max(zn, a) / min(zn, a)) ** -beta_minus
    return GreenBoundReport(pole_radius, float(ratio.max()), float(ratio[interior].min()),
                            float(near), bool(np.all(G > 0)), samples)
