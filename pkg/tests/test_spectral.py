import numpy as np
import pytest

from hardyball.errors import AdmissibilityError
from hardyball.extremals import compute_mu_rn
from hardyball.oracles import lambda1_ball_oracle, lambda_star_ball_oracle
from hardyball.params import ProblemParams, compute_exponents
from hardyball.spectral import ground_state, janelli_lambda_star, lambda1
from scipy import special


@pytest.mark.parametrize("n,gamma", [(3, 0.0), (3, 0.2), (4, 0.75), (5, -1.0), (6, 1.0)])
def test_lambda1_is_a_squared_bessel_zero(n, gamma):
    nu = compute_exponents(ProblemParams(n, gamma)).nu
    zero = lambda1_ball_oracle(nu) ** 0.5
    assert abs(special.jv(nu, zero)) < 1e-13  # the oracle is a true zero
    assert lambda1(ProblemParams(n, gamma)).value == pytest.approx(zero**2, rel=1e-8)


def test_lambda1_scales_with_radius():
    p = ProblemParams(3, 0.1)
    one = lambda1(p).value
    assert lambda1(p.with_(ball_radius=2.0)).value == pytest.approx(one / 4, rel=1e-8)


def test_sphere_eigenvalue_pi_squared():
    assert lambda1(ProblemParams(3, 0.0)).value == pytest.approx(np.pi**2, rel=1e-9)


@pytest.mark.parametrize("n,gamma", [(3, 0.0), (3, 0.1), (4, 0.75), (5, 2.0)])
def test_janelli_threshold_matches_negative_order_zero(n, gamma):
    nu = compute_exponents(ProblemParams(n, gamma)).nu
    got = janelli_lambda_star(ProblemParams(n, gamma)).value
    assert got == pytest.approx(lambda_star_ball_oracle(nu), rel=1e-6)


def test_three_dim_threshold_is_quarter_pi_squared():
    assert janelli_lambda_star(ProblemParams(3, 0.0)).value == pytest.approx(np.pi**2 / 4, rel=1e-6)


def test_eigenfunction_is_positive_and_normalised():
    ef = lambda1(ProblemParams(4, 0.5)).eigenfunction
    assert np.all(ef.values[:-1] > 0)
    assert ef.values[-1] == 0.0


def test_ground_state_below_threshold_is_not_attained_and_above_is():
    p = ProblemParams(3, 0.1)
    mu_rn = compute_mu_rn(p)
    lam_star = janelli_lambda_star(p).value
    above = ground_state(p.with_(lam=1.5 * lam_star))
    assert above.mu < mu_rn * (1 - 1e-3)
    assert above.residual < 1e-8
    below = ground_state(p.with_(lam=0.5 * lam_star))
    assert below.mu == pytest.approx(mu_rn, rel=5e-3)


def test_ground_state_decreases_in_lambda():
    p = ProblemParams(3, 0.1)
    lam_star = janelli_lambda_star(p).value
    mus = [ground_state(p.with_(lam=f * lam_star)).mu for f in (1.2, 1.5, 2.0)]
    assert mus[0] > mus[1] > mus[2]


def test_inadmissible_lambda_rejected():
    with pytest.raises(AdmissibilityError):
        ProblemParams(3, 0.0, lam=float("nan"))
