import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hardyball.errors import NoAdmissibleBetaPrime, RegimeError
from hardyball.mass import (
    SolutionSign,
    ThresholdMethod,
    entire_solution_fit,
    interior_mass,
    lambda_star_by_mass,
    lambda_star_merely_singular_highdim,
    mass_oracle_bessel,
    pohozaev_residual,
    subsupersolution_check,
)
from hardyball.oracles import lambda_star_ball_oracle, radial_mass_3d
from hardyball.params import ProblemParams, compute_exponents
from hardyball.radial import Branch
from hardyball.spectral import ground_state, janelli_lambda_star


@given(n=st.integers(3, 8), frac=st.floats(0.01, 0.99), rho=st.floats(0.5, 3.0))
@settings(max_examples=25, deadline=None)
def test_mass_without_potential_is_minus_rho_to_the_minus_gap(n, frac, rho):
    top = (n - 2) ** 2 / 4
    gamma = top - frac  # gap = 2 sqrt(frac) < 2
    p = ProblemParams(n, gamma, ball_radius=rho)
    gap = compute_exponents(p).gap
    assert interior_mass(p).mass == pytest.approx(-rho**-gap, rel=1e-8)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 2.4])
def test_three_dim_mass_is_minus_k_cot_k(lam):
    assert interior_mass(ProblemParams(3, 0.0, lam=lam)).mass == pytest.approx(radial_mass_3d(lam), rel=1e-9)


def test_bessel_oracle_reduces_to_cotangent():
    # nu = 1/2: the Bessel ratio collapses to -k cot k
    for lam in (0.3, 1.7, 5.0):
        assert mass_oracle_bessel(ProblemParams(3, 0.0), lam) == pytest.approx(radial_mass_3d(lam), rel=1e-12)


def test_mass_against_independent_shooting():
    # integrate u'' + (n-1)u'/r + (gamma/r^2 + lam) u = 0 from the boundary and read off c2/c1
    p = ProblemParams(4, 0.5, lam=3.0)
    e = compute_exponents(p)
    bp, bm = e.beta_plus, e.beta_minus

    def rhs(t, y):
        r = math.exp(t)
        return [y[1], -(p.n - 2) * y[1] - (p.gamma + p.lam * r * r) * y[0]]

    sol = integrate.solve_ivp(rhs, (0.0, math.log(1e-5)), [0.0, -1.0], method="DOP853",
                              rtol=1e-12, atol=1e-16, dense_output=True)
    r = np.geomspace(1e-5, 1e-3, 12)
    vals = sol.sol(np.log(r))[0]
    # leading terms of both branches with their first two even corrections
    basis = np.column_stack([r ** (2 * k - b) for b in (bp, bm) for k in range(3)])
    c, *_ = np.linalg.lstsq(basis, vals, rcond=None)
    assert interior_mass(p).mass == pytest.approx(c[3] / c[0], rel=1e-5)  # fit-limited


def test_mass_increases_in_lambda():
    p = ProblemParams(3, 0.1)
    ms = [interior_mass(p.with_(lam=lam)).mass for lam in np.linspace(0.0, 8.0, 9)]
    assert np.all(np.diff(ms) > 0)


def test_mass_requires_low_dimension():
    with pytest.raises(RegimeError):
        interior_mass(ProblemParams(4, 0.0))
    with pytest.raises(RegimeError):
        mass_oracle_bessel(ProblemParams(6, 1.0), 1.0)


@pytest.mark.parametrize("n,gamma", [(3, 0.0), (3, 0.2), (4, 0.75), (5, 2.0)])
def test_threshold_by_mass_matches_bessel_zero(n, gamma):
    p = ProblemParams(n, gamma)
    rep = lambda_star_by_mass(p)
    nu = compute_exponents(p).nu
    assert rep.method is ThresholdMethod.MASS_BISECTION
    assert rep.lambda_star == pytest.approx(lambda_star_ball_oracle(nu), rel=1e-7)
    assert max(rep.cross_residuals.values()) < 1e-6


def test_highdim_merely_singular_threshold():
    assert lambda_star_merely_singular_highdim(ProblemParams(5, -2.0, ball_radius=2.0)) == 0.5
    with pytest.raises(RegimeError):
        lambda_star_merely_singular_highdim(ProblemParams(3, -1.0))


def test_pohozaev_holds_on_a_ground_state():
    p = ProblemParams(3, 0.1)
    lam = 1.5 * janelli_lambda_star(p).value
    gs = ground_state(p.with_(lam=lam))
    assert abs(pohozaev_residual(p.with_(lam=lam), gs.profile, gs.mu)) < 1e-3


@pytest.mark.parametrize("sign", [SolutionSign.SUPER, SolutionSign.SUB])
@pytest.mark.parametrize("branch", [Branch.PLUS, Branch.MINUS])
def test_subsupersolutions_verified(sign, branch):
    rep = subsupersolution_check(ProblemParams(3, 0.1), theta=0.5, beta_choice=branch, sign=sign)
    assert rep.verified and rep.delta > 0
    assert 0 < rep.beta - rep.beta_prime < 0.5


def test_exact_powers_have_zero_residual():
    rep = subsupersolution_check(ProblemParams(4, 0.5), theta=1.0, sign=SolutionSign.NONE, a=0.0)
    assert rep.verified and max(abs(rep.max_value), abs(rep.min_value)) < 1e-12


def test_nonpositive_theta_rejected():
    with pytest.raises(NoAdmissibleBetaPrime):
        subsupersolution_check(ProblemParams(3, 0.1), theta=0.0)


def test_entire_solutions_are_power_combinations():
    p = ProblemParams(5, 1.0)
    e = compute_exponents(p)
    # u = 2 r^{-beta_-} - 3 r^{-beta_+} at r = 1
    fit = entire_solution_fit(p, -1.0, -2 * e.beta_minus + 3 * e.beta_plus)
    assert fit.coef_minus == pytest.approx(2.0, rel=1e-8)
    assert fit.coef_plus == pytest.approx(-3.0, rel=1e-8)
