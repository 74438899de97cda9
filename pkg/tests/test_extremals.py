import math

import numpy as np
import pytest

from hardyball.errors import BubbleUnresolved, RegimeError
from hardyball.extremals import (
    chi_residual,
    compute_chi,
    compute_mu_rn,
    energy_of_test_function,
    eval_U,
    eval_U_eps,
    expansion_slope,
    make_test_function,
    mu_rn_source,
    norm_ratio_u2,
)
from hardyball.params import ProblemParams, compute_exponents, unit_sphere_area

CASES = [(3, 0.0, 0.0), (4, 0.0, 0.0), (3, 0.1, 0.5), (5, 2.0, 1.0), (6, 3.5, 1.5), (4, 0.5, 0.0)]


def _lieb(n, s):
    """Best Hardy-Sobolev constant for gamma = 0 (Lieb's closed form)."""
    w = unit_sphere_area(n)
    q = (n - s) / (2 - s)
    return (n - 2) * (n - s) * (w / (2 - s) * math.gamma(q) ** 2 / math.gamma(2 * q)) ** ((2 - s) / (n - s))


def test_doc_value():
    assert eval_U(ProblemParams(4, 0.0), 1.0) == 0.5
    assert eval_U(ProblemParams(3, 0.0), 0.0) == 1.0


@pytest.mark.parametrize("n,gamma,s", CASES)
def test_chi_closed_form(n, gamma, s):
    # substituting r -> r^{gap/(n-2)} maps the gamma = 0 bubble onto U
    p = ProblemParams(n, gamma, s=s)
    gap = compute_exponents(p).gap
    assert compute_chi(p) == pytest.approx((n - s) * gap**2 / (n - 2), rel=1e-12)


@pytest.mark.parametrize("n,gamma,s", CASES)
def test_profile_solves_the_whole_space_equation(n, gamma, s):
    p = ProblemParams(n, gamma, s=s)
    r = np.geomspace(1e-4, 1e4, 41)
    assert np.max(chi_residual(p, compute_chi(p), r)) < 1e-9


@pytest.mark.parametrize("n,gamma,s", CASES + [(4, -1.0, 0.3), (3, -0.5, 0.5)])
def test_mu_rn_against_lieb_scaling(n, gamma, s):
    p = ProblemParams(n, gamma, s=s)
    if not (gamma > 0 or s > 0):
        ref = _lieb(n, 0.0)
    else:
        ratio = compute_exponents(p).gap / (n - 2)
        ref = _lieb(n, s) * ratio ** ((2 * n - 2 - s) / (n - s))
    assert compute_mu_rn(p) == pytest.approx(ref, rel=1e-9)


def test_merely_singular_uses_sobolev_constant():
    p = ProblemParams(3, -0.5)
    assert mu_rn_source(p) == "sobolev_value"
    assert compute_mu_rn(p) == pytest.approx(3 * (math.pi / 2) ** (4 / 3), rel=1e-12)


def test_rescaling_preserves_the_constraint_integral():
    p = ProblemParams(3, 0.0)
    r = np.geomspace(1e-6, 1e6, 20001)
    pexp = compute_exponents(p).two_star_s
    ints = [np.trapezoid(eval_U_eps(p, eps, r) ** pexp * r**2 * r, np.log(r)) for eps in (1.0, 0.1)]
    assert ints[1] == pytest.approx(ints[0], rel=1e-6)


def test_norm_ratio_requires_large_gap():
    with pytest.raises(RegimeError):
        norm_ratio_u2(ProblemParams(3, 0.0))
    # gamma = 0, s = 0, n = 5: |U|_2^2 / |U|_{2*}^2 in closed form via Beta integrals
    p = ProblemParams(5, 0.0)
    w = unit_sphere_area(5)
    l2 = w * 0.5 * math.gamma(2.5) * math.gamma(0.5) / math.gamma(3.0)
    lp = w * 0.5 * math.gamma(2.5) * math.gamma(2.5) / math.gamma(5.0)
    assert norm_ratio_u2(p) == pytest.approx(l2 / lp ** (3 / 5), rel=1e-9)


def test_bubble_energy_tends_to_mu_rn():
    p = ProblemParams(5, 0.5, lam=0.5)
    mu = compute_mu_rn(p)
    gaps = [energy_of_test_function(p, make_test_function(p, 2.0**-k)).energy - mu for k in (6, 9, 12)]
    assert abs(gaps[2]) < abs(gaps[1]) < abs(gaps[0])


def test_unresolved_bubble_raises():
    p = ProblemParams(3, 0.1)
    with pytest.raises(BubbleUnresolved):
        energy_of_test_function(p, make_test_function(p, 0.2))
    with pytest.raises(BubbleUnresolved):
        energy_of_test_function(p, make_test_function(p, 1e-9))


def test_high_dim_slope_is_negative_for_positive_lambda():
    fit = expansion_slope(ProblemParams(6, 0.0, lam=1.0), ks=range(5, 11))
    assert fit.leading_power == 2.0
    assert fit.slope < 0
