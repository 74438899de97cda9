"""
Radial numerics: graded grids, weighted quadrature, P1 assembly of the
Hardy-Schrodinger quadratic form, a tridiagonal pencil eigensolver and
Frobenius-series branches of the singular radial ODE

    u'' + (n-1)/r u' + (gamma/r^2 + h(r)) u = 0.

The origin is never a grid node.  Grids start at an inner cut ``r0`` and the
segment ``[0, r0]`` is treated analytically by continuing the profile with the
appropriate local power law ``r^{-sigma}``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate
from scipy.linalg import solve_banded

from .errors import NonIntegrableSingularity, ResonantIndicialGap, StepFailure
from .params import ProblemParams, unit_sphere_area

PotentialLike = Union[None, float, int, Polynomial]

DEFAULT_R0_FRACTION = 1e-6
DEFAULT_FROBENIUS_ORDER = 12
_GAUSS_POINTS = 8


class Grading(enum.Enum):
    GEOMETRIC = "Geometric"
    UNIFORM = "Uniform"


class Branch(enum.Enum):
    PLUS = "Plus"  # local behaviour r^{-beta_+}
    MINUS = "Minus"  # local behaviour r^{-beta_-}


def as_potential(h: PotentialLike) -> Polynomial:
    """Coerce a constant or polynomial ``h(r) = sum c_j r^j`` into a :class:`Polynomial`."""
    if h is None:
        return Polynomial([0.0])
    if isinstance(h, Polynomial):
        return h
    return Polynomial([float(h)])


def _is_even(poly: Polynomial) -> bool:
    return all(c == 0.0 for c in poly.coef[1::2])


# ---------------------------------------------------------------------------
# grids and radial functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadialGrid:
    radius: float
    nodes: np.ndarray
    grading: Grading

    @property
    def r0(self) -> float:
        return float(self.nodes[0])

    @property
    def count(self) -> int:
        return len(self.nodes)

    def refined(self) -> "RadialGrid":
        """Halve every interval (log-interval for geometric grids)."""
        return make_grid(self.radius, 2 * self.count - 1, self.grading, self.r0)


def make_grid(radius: float, count: int, grading: Grading = Grading.GEOMETRIC,
              r0: Optional[float] = None) -> RadialGrid:
    """Nodes ``r0 = r_0 < ... < r_{count-1} = radius``.

    Geometric grids have a constant ratio ``(radius/r0)^{1/(count-1)}``.
    """
    if r0 is None:
        r0 = DEFAULT_R0_FRACTION * radius
    if not 0.0 < r0 < radius:
        raise ValueError(f"inner cut r0={r0} must satisfy 0 < r0 < radius={radius}")
    if count < 2:
        raise ValueError(f"a grid needs at least 2 nodes, got {count}")
    grading = Grading(grading)
    if grading is Grading.GEOMETRIC:
        nodes = np.geomspace(r0, radius, count)
    else:
        nodes = np.linspace(r0, radius, count)
    nodes[0], nodes[-1] = r0, radius
    return RadialGrid(radius=float(radius), nodes=nodes, grading=grading)


@dataclass
class RadialFunction:
    """Nodal values of a radial profile.  ``leading_power`` q means f ~ r^q below r0."""

    grid: RadialGrid
    values: np.ndarray
    leading_power: float = 0.0

    @property
    def boundary_value(self) -> float:
        return float(self.values[-1])

    def __call__(self, r):
        return np.interp(r, self.grid.nodes, self.values)


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


def quadrature(f: RadialFunction, weight_exponent: float, n: int) -> float:
    """``omega_{n-1} * int_0^rho f(r) r^{n-1+w} dr`` with the inner segment done exactly.

    Below ``r0`` the profile is continued as ``f(r0) (r/r0)^q`` with ``q = f.leading_power``.
    """
    nodes = f.grid.nodes
    q = f.leading_power
    total_power = q + n + weight_exponent
    if total_power <= 0.0:
        raise NonIntegrableSingularity(
            f"integrand ~ r^{total_power - 1:.6g} near 0 is not integrable"
        )
    r0 = nodes[0]
    inner = f.values[0] * r0 ** (n + weight_exponent) / total_power
    g = f.values * nodes ** (n - 1 + weight_exponent)
    outer = integrate.simpson(g, x=nodes)
    return unit_sphere_area(n) * float(inner + outer)


# ---------------------------------------------------------------------------
# P1 assembly
# ---------------------------------------------------------------------------


@dataclass
class TridiagonalPencil:
    """Symmetric tridiagonal pair ``(A, M)`` on the free nodes (all but the Dirichlet node).

    ``*_diag`` has length m, ``*_off`` length m-1 (super = sub diagonal).
    """

    a_diag: np.ndarray
    a_off: np.ndarray
    m_diag: np.ndarray
    m_off: np.ndarray
    grid: RadialGrid
    inner_power: float

    @property
    def size(self) -> int:
        return len(self.a_diag)

    def dense(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.diag(self.a_diag) + np.diag(self.a_off, 1) + np.diag(self.a_off, -1)
        m = np.diag(self.m_diag) + np.diag(self.m_off, 1) + np.diag(self.m_off, -1)
        return a, m

    def apply_a(self, u: np.ndarray) -> np.ndarray:
        return _tri_matvec(self.a_diag, self.a_off, u)

    def apply_m(self, u: np.ndarray) -> np.ndarray:
        return _tri_matvec(self.m_diag, self.m_off, u)

    def shifted_banded(self, sigma: float) -> np.ndarray:
        """``A - sigma M`` in LAPACK banded layout for :func:`scipy.linalg.solve_banded`."""
        ab = np.zeros((3, self.size))
        off = self.a_off - sigma * self.m_off
        ab[0, 1:] = off
        ab[1] = self.a_diag - sigma * self.m_diag
        ab[2, :-1] = off
        return ab

    def count_below(self, sigma: float) -> int:
        """Number of generalised eigenvalues below ``sigma`` (Sylvester inertia of A - sigma M)."""
        d = (self.a_diag - sigma * self.m_diag).tolist()
        e = (self.a_off - sigma * self.m_off).tolist()
        tiny = 1e-300
        count = 0
        piv = d[0]
        if piv < 0.0:
            count += 1
        for i in range(1, len(d)):
            if piv == 0.0:
                piv = tiny
            piv = d[i] - e[i - 1] * e[i - 1] / piv
            if piv < 0.0:
                count += 1
        return count


def _tri_matvec(diag, off, u):
    out = diag * u
    out[:-1] += off * u[1:]
    out[1:] += off * u[:-1]
    return out


def _element_gauss(nodes: np.ndarray):
    x, w = np.polynomial.legendre.leggauss(_GAUSS_POINTS)
    ra, rb = nodes[:-1], nodes[1:]
    h = rb - ra
    r = 0.5 * (ra + rb)[:, None] + 0.5 * h[:, None] * x[None, :]
    wq = 0.5 * h[:, None] * w[None, :]
    phi_a = (rb[:, None] - r) / h[:, None]
    phi_b = (r - ra[:, None]) / h[:, None]
    return r, wq, phi_a, phi_b, h


def _power_moment(ra, rb, e):
    """int_ra^rb r^e dr."""
    if abs(e + 1.0) < 1e-14:
        return math.log(rb / ra)
    return (rb ** (e + 1) - ra ** (e + 1)) / (e + 1)


def _exact_element(ra: float, rb: float, a: float, gamma: float, h: Polynomial):
    """Closed-form element integrals for weight r^a (used where Gauss rules are poor).

    Returns (stiff, p_aa, p_ab, p_bb, m_aa, m_ab, m_bb).
    """
    hl = rb - ra
    # phi_a = (rb - r)/hl, phi_b = (r - ra)/hl as polynomials in r
    pa = Polynomial([rb, -1.0]) / hl
    pb = Polynomial([-ra, 1.0]) / hl

    def moment(poly: Polynomial, shift: float) -> float:
        return sum(c * _power_moment(ra, rb, a + shift + k) for k, c in enumerate(poly.coef) if c != 0.0)

    stiff = _power_moment(ra, rb, a) / hl**2
    out = [stiff]
    for prod in (pa * pa, pa * pb, pb * pb):
        val = gamma * moment(prod, -2.0) + moment(prod * h, 0.0)
        out.append(val)
    for prod in (pa * pa, pa * pb, pb * pb):
        out.append(moment(prod, 0.0))
    return tuple(out)


def branch_exponent(n: int, gamma: float, weight_exponent: float = 0.0, which: str = "minus") -> float:
    """Roots sigma of ``sigma^2 - (n-2+w) sigma + gamma = 0`` (local law r^{-sigma})."""
    b = n - 2 + weight_exponent
    disc = b * b / 4.0 - gamma
    root = math.sqrt(max(disc, 0.0))
    return b / 2.0 - root if which == "minus" else b / 2.0 + root


def assemble_operator(p: ProblemParams, h: PotentialLike, grid: RadialGrid,
                      weight_exponent: float = 0.0,
                      inner_power: Optional[float] = None,
                      gamma: Optional[float] = None) -> TridiagonalPencil:
    """P1 discretisation of the radial quadratic forms

        A(u,u) = omega * int (u'^2 - (gamma/r^2 + h) u^2) r^{n-1+w} dr
        M(u,u) = omega * int u^2 r^{n-1+w} dr

    with ``u(radius) = 0``.  Below ``r0`` the trial function is continued as
    ``u(r0) (r/r0)^{-inner_power}`` (default: the beta_- branch of the weighted
    operator), and that segment's contribution enters the first diagonal entry.
    """
    n = p.n
    gamma = p.gamma if gamma is None else gamma
    h = as_potential(h)
    w = weight_exponent
    if inner_power is None:
        inner_power = branch_exponent(n, gamma, w, "minus")
    nodes = grid.nodes
    omega = unit_sphere_area(n)
    r, wq, phi_a, phi_b, hel = _element_gauss(nodes)
    weight = r ** (n - 1 + w)
    stiff = np.sum(wq * weight, axis=1) / hel**2
    pot = (gamma / r**2 + h(r)) * weight
    p_aa = np.sum(wq * pot * phi_a * phi_a, axis=1)
    p_ab = np.sum(wq * pot * phi_a * phi_b, axis=1)
    p_bb = np.sum(wq * pot * phi_b * phi_b, axis=1)
    m_aa = np.sum(wq * weight * phi_a * phi_a, axis=1)
    m_ab = np.sum(wq * weight * phi_a * phi_b, axis=1)
    m_bb = np.sum(wq * weight * phi_b * phi_b, axis=1)
    # elements with a large end ratio (uniform grids near 0): exact moments
    for i in np.nonzero(nodes[1:] / nodes[:-1] > 1.5)[0]:
        (stiff[i], p_aa[i], p_ab[i], p_bb[i],
         m_aa[i], m_ab[i], m_bb[i]) = _exact_element(nodes[i], nodes[i + 1], n - 1 + w, gamma, h)

    nn = len(nodes)
    a_diag = np.zeros(nn)
    m_diag = np.zeros(nn)
    a_diag[:-1] += stiff - p_aa
    a_diag[1:] += stiff - p_bb
    a_off = -stiff - p_ab
    m_diag[:-1] += m_aa
    m_diag[1:] += m_bb
    m_off = m_ab.copy()

    r0 = nodes[0]
    sig = inner_power
    coef = sig * sig - gamma
    if abs(coef) > 1e-14:
        denom = n - 2 + w - 2 * sig
        if denom <= 0.0:
            raise NonIntegrableSingularity("inner branch has infinite energy")
        a_diag[0] += coef * r0 ** (n - 2 + w) / denom
    denom_m = n + w - 2 * sig
    if denom_m <= 0.0:
        raise NonIntegrableSingularity("inner branch is not square integrable")
    inner_mass = r0 ** (n + w) / denom_m
    a_diag[0] -= float(h(0.0)) * inner_mass
    m_diag[0] += inner_mass

    # drop the Dirichlet node
    return TridiagonalPencil(
        a_diag=omega * a_diag[:-1],
        a_off=omega * a_off[:-1],
        m_diag=omega * m_diag[:-1],
        m_off=omega * m_off[:-1],
        grid=grid,
        inner_power=sig,
    )


# ---------------------------------------------------------------------------
# smallest eigenpair of a tridiagonal pencil
# ---------------------------------------------------------------------------


@dataclass
class Eigenpair:
    value: float
    vector: np.ndarray
    residual: float


def smallest_eigenpair(pencil: TridiagonalPencil, rel_bracket: float = 1e-4,
                       max_inverse_iter: int = 60, tol: float = 1e-13) -> Eigenpair:
    """Bisection on the inertia of ``A - sigma M`` followed by shifted inverse iteration.

    The pencil is first equilibrated with ``D = diag(M)^{-1/2}``: radial weights
    ``r^{n-1}`` on geometric grids spread the entries over many decades, and the
    banded LU loses the small-radius end otherwise.  Congruence keeps the
    eigenvalues and the inertia.
    """
    d = 1.0 / np.sqrt(pencil.m_diag)
    dd = d[:-1] * d[1:]
    original = pencil
    pencil = replace(pencil, a_diag=pencil.a_diag * d * d, a_off=pencil.a_off * dd,
                     m_diag=pencil.m_diag * d * d, m_off=pencil.m_off * dd)
    # Gershgorin-type bound on the spectrum of M^{-1}A via Rayleigh quotients
    lo = -1.0
    while pencil.count_below(lo) > 0:
        lo *= 4.0
    hi = 1.0
    while pencil.count_below(hi) < 1:
        hi *= 4.0
    while hi - lo > rel_bracket * max(abs(hi), abs(lo), 1e-300):
        mid = 0.5 * (lo + hi)
        if pencil.count_below(mid) >= 1:
            hi = mid
        else:
            lo = mid
    sigma = lo - 0.5 * (hi - lo)
    ab = pencil.shifted_banded(sigma)
    u = np.ones(pencil.size)
    value = sigma
    for _ in range(max_inverse_iter):
        v = solve_banded((1, 1), ab, pencil.apply_m(u))
        v /= math.sqrt(float(v @ pencil.apply_m(v)))
        new_value = float(v @ pencil.apply_a(v))
        u = v
        if abs(new_value - value) <= tol * abs(new_value):
            value = new_value
            break
        value = new_value
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    res = pencil.apply_a(u) - value * pencil.apply_m(u)
    scale = np.linalg.norm(pencil.apply_a(u))
    u = d * u
    u /= math.sqrt(float(u @ original.apply_m(u)))
    return Eigenpair(value=value, vector=u, residual=float(np.linalg.norm(res) / scale))


# ---------------------------------------------------------------------------
# Frobenius branches
# ---------------------------------------------------------------------------


@dataclass
class FrobeniusBranch:
    indicial_exponent: float  # the solution behaves like r^{indicial_exponent}
    series_coeffs: np.ndarray  # a_k multiplying r^{k + indicial_exponent}
    truncation_order: int
    start_radius: float
    recurrence_residual: float = 0.0

    def series(self, r):
        """Truncated series value and derivative at ``r``."""
        r = np.asarray(r, dtype=float)
        k = np.arange(len(self.series_coeffs))
        e = self.indicial_exponent
        powers = r[..., None] ** k
        val = np.sum(self.series_coeffs * powers, axis=-1) * r**e
        dpow = np.sum(self.series_coeffs * (k + e) * powers, axis=-1) * r ** (e - 1)
        return val, dpow


def frobenius_coefficients(n: int, gamma: float, h: Polynomial, exponent: float,
                           order: int) -> tuple[np.ndarray, float]:
    """Coefficients a_0..a_K of ``r^e sum a_k r^k`` solving the radial ODE, ``a_0 = 1``.

    Recurrence: ``a_m P(m+e) = -sum_j c_j a_{m-2-j}`` with ``P(t) = t(t+n-2) + gamma``.
    """
    c = h.coef
    a = np.zeros(order + 1)
    a[0] = 1.0
    worst = 0.0
    for m in range(1, order + 1):
        rhs = 0.0
        for j, cj in enumerate(c):
            if m - 2 - j >= 0:
                rhs -= cj * a[m - 2 - j]
        t = m + exponent
        pm = t * (t + n - 2) + gamma
        if abs(pm) < 1e-8:
            if rhs != 0.0:
                raise ResonantIndicialGap(
                    f"indicial roots differ by the integer {m}; series needs a log term"
                )
            a[m] = 0.0
            continue
        a[m] = rhs / pm
        resid = a[m] * pm - rhs
        worst = max(worst, abs(resid) / max(abs(rhs), 1e-300) if rhs != 0.0 else abs(resid))
    return a, worst


class FrobeniusSolution:
    """Local branch ``r^{-beta}(1 + ...)`` continued outward.

    Uses the series wherever its tail is negligible and an 8th-order
    Runge-Kutta integration in ``t = log r`` beyond that.
    """

    def __init__(self, p: ProblemParams, h: PotentialLike, branch: Branch,
                 r_end: float, r0: Optional[float] = None,
                 order: int = DEFAULT_FROBENIUS_ORDER, rtol: float = 1e-13,
                 gamma: Optional[float] = None):
        self.params = p
        self.h = as_potential(h)
        self.branch = Branch(branch)
        self.gamma = p.gamma if gamma is None else gamma
        self.n = p.n
        half = (self.n - 2) / 2.0
        root = math.sqrt(half * half - self.gamma)
        bm, bp = half - root, half + root
        beta = bp if self.branch is Branch.PLUS else bm
        if self.branch is Branch.PLUS:
            self._check_resonance(bp - bm, order)
        coeffs, resid = frobenius_coefficients(self.n, self.gamma, self.h, -beta, order)
        self.r_end = float(r_end)
        self.r0 = float(r0) if r0 is not None else DEFAULT_R0_FRACTION * self.r_end
        self.branch_data = FrobeniusBranch(
            indicial_exponent=-beta, series_coeffs=coeffs,
            truncation_order=order, start_radius=self.r0, recurrence_residual=resid,
        )
        self.r_switch = min(self._series_radius(coeffs), self.r_end)
        self._ode = None
        if self.r_switch < self.r_end:
            self._integrate(rtol)

    def _check_resonance(self, gap: float, order: int):
        if not np.any(self.h.coef):
            return
        even = _is_even(self.h)
        top = max(order, int(math.ceil(gap)) + 1)
        for m in range(1, top + 1):
            if even and m % 2:
                continue
            if abs(m - gap) < 1e-8:
                raise ResonantIndicialGap(
                    f"beta_+ - beta_- = {gap} is within 1e-8 of the resonant integer {m}"
                )

    @staticmethod
    def _series_radius(coeffs: np.ndarray, tol: float = 1e-17) -> float:
        nz = [k for k in range(1, len(coeffs)) if coeffs[k] != 0.0]
        if not nz:
            return math.inf
        tail = nz[-2:] if len(nz) > 1 else nz
        return min((tol / abs(coeffs[k])) ** (1.0 / k) for k in tail)

    def _rhs(self, t, y):
        r = math.exp(t)
        return [y[1], -(self.n - 2) * y[1] - (self.gamma + r * r * float(self.h(r))) * y[0]]

    def _integrate(self, rtol: float):
        rs = self.r_switch
        val, dval = self.branch_data.series(rs)
        y0 = [float(val), float(rs * dval)]
        scale = max(abs(y0[0]), abs(y0[1]))
        sol = integrate.solve_ivp(
            self._rhs, (math.log(rs), math.log(self.r_end)), y0, method="DOP853",
            rtol=rtol, atol=1e-16 * scale, dense_output=True,
        )
        if not sol.success:
            raise StepFailure(sol.message)
        self._ode = sol

    def __call__(self, r):
        return self.evaluate(r)[0]

    def evaluate(self, r):
        """Value and r-derivative at ``r`` (scalar or array, 0 < r <= r_end)."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        val = np.empty_like(r_arr)
        der = np.empty_like(r_arr)
        inner = r_arr <= self.r_switch
        if np.any(inner):
            v, d = self.branch_data.series(r_arr[inner])
            val[inner], der[inner] = v, d
        if np.any(~inner):
            ro = r_arr[~inner]
            y = self._ode.sol(np.log(ro))
            val[~inner] = y[0]
            der[~inner] = y[1] / ro
        if np.ndim(r) == 0:
            return float(val[0]), float(der[0])
        return val, der

    def remainder(self, r):
        """Value and derivative of ``y - r^e`` (the branch minus its leading power).

        Inside the series region the leading term is dropped analytically, so the
        remainder keeps full relative accuracy as r -> 0.
        """
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        e = self.branch_data.indicial_exponent
        a = self.branch_data.series_coeffs
        val, der = self.evaluate(r_arr)
        val = val - r_arr**e
        der = der - e * r_arr ** (e - 1)
        inner = r_arr <= self.r_switch
        if np.any(inner):
            ri = r_arr[inner]
            k = np.arange(1, len(a))
            powers = ri[:, None] ** k
            val[inner] = np.sum(a[1:] * powers, axis=1) * ri**e
            der[inner] = np.sum(a[1:] * (k + e) * powers, axis=1) * ri ** (e - 1)
        if np.ndim(r) == 0:
            return float(val[0]), float(der[0])
        return val, der

    def on_grid(self, grid: RadialGrid) -> RadialFunction:
        return RadialFunction(grid, self(grid.nodes), self.branch_data.indicial_exponent)

    def ode_residual(self, r) -> np.ndarray:
        """Relative residual of the ODE, with u'' obtained from the integrator's state.

        Only meaningful in the series region; beyond it the residual is the
        integrator's own and is reported as zero.
        """
        r = np.atleast_1d(np.asarray(r, dtype=float))
        k = np.arange(len(self.branch_data.series_coeffs))
        e = self.branch_data.indicial_exponent
        a = self.branch_data.series_coeffs
        powers = r[:, None] ** k
        u = np.sum(a * powers, axis=1) * r**e
        du = np.sum(a * (k + e) * powers, axis=1) * r ** (e - 1)
        d2u = np.sum(a * (k + e) * (k + e - 1) * powers, axis=1) * r ** (e - 2)
        res = d2u + (self.n - 1) / r * du + (self.gamma / r**2 + self.h(r)) * u
        scale = np.abs(d2u) + np.abs((self.n - 1) / r * du) + np.abs(self.gamma / r**2 * u) + np.abs(self.h(r) * u)
        out = np.abs(res) / scale
        out[r > self.r_switch] = 0.0
        return out


def frobenius_solve(p: ProblemParams, h: PotentialLike, branch: Branch, r_end: Optional[float] = None,
                    **kwargs) -> FrobeniusSolution:
    """Solution with local behaviour ``r^{-beta_+}`` (Plus) or ``r^{-beta_-}`` (Minus), a_0 = 1."""
    if r_end is None:
        r_end = p.ball_radius
    if r_end > p.ball_radius * (1 + 1e-12):
        raise ValueError(f"r_end={r_end} exceeds the ball radius {p.ball_radius}")
    return FrobeniusSolution(p, h, branch, r_end, **kwargs)


def wronskian(n: int, plus: FrobeniusSolution, minus: FrobeniusSolution, r) -> np.ndarray:
    """``r^{n-1} (y_+ y_-' - y_+' y_-)``; constant (= beta_+ - beta_-) for exact branches."""
    yp, dyp = plus.evaluate(r)
    ym, dym = minus.evaluate(r)
    return np.asarray(r) ** (n - 1) * (yp * dym - dyp * ym)
