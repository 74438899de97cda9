import math

import numpy as np
import pytest
from scipy import special

from hardyball.errors import BubbleUnresolved, NotCoercive, PoleTooCloseToOrigin, RegimeError
from hardyball.params import ProblemParams
from hardyball.robin3d import (
    AxiGrid,
    _green_field,
    energy_of_offcenter_bubble,
    green_bound_check,
    lambda_star_merely_singular_3d,
    offcenter_expansion_slope,
    robin_mass_at,
    robin_sup,
)


def images_robin(a):
    # Kelvin image charge for the unit ball
    return -1.0 / (1.0 - a * a)


def helmholtz_robin(lam, a, terms=40):
    """Regular part at the pole from the addition theorem for cos(k d)/d."""
    k = math.sqrt(lam)
    ls = np.arange(terms)
    jl_a = special.spherical_jn(ls, k * a)
    # grouped so each factor stays bounded; the l-th term decays like a^{2l}
    terms = (jl_a / special.spherical_jn(ls, k)) * (jl_a * special.spherical_yn(ls, k))
    return float(k * np.sum((2 * ls + 1) * terms))


def test_grid_geometry():
    g = AxiGrid(8, 6, radius=2.0)
    assert g.volumes.sum() == pytest.approx(4 / 3 * math.pi * 8, rel=1e-12)
    assert g.refined().n_r == 16 and g.refined().n_theta == 12
    assert g.dr == 0.25


@pytest.mark.parametrize("a", [0.1, 0.5, 0.9])
def test_laplace_robin_matches_images(a):
    res = robin_mass_at(0.0, 0.0, a)
    assert res.robin_mass == pytest.approx(images_robin(a), abs=1e-5)
    assert abs(res.robin_mass - images_robin(a)) < max(10 * res.error_bar, 1e-6)


def test_centre_value_is_minus_k_cot_k():
    for lam in (1.0, math.pi**2 / 4, 5.0):
        assert robin_mass_at(0.0, lam, 0.0).robin_mass == pytest.approx(-math.sqrt(lam) / math.tan(math.sqrt(lam)),
                                                                       abs=1e-6)


@pytest.mark.parametrize("lam,a", [(1.0, 0.5), (4.0, 0.3), (6.0, 0.7)])
def test_helmholtz_robin_off_centre(lam, a):
    assert helmholtz_robin(0.0001, 0.0) == pytest.approx(-0.01 / math.tan(0.01), rel=1e-10)
    assert robin_mass_at(0.0, lam, a).robin_mass == pytest.approx(helmholtz_robin(lam, a), abs=1e-5)


def test_green_field_pointwise_against_images():
    a = 0.4
    gf = _green_field(0.0, 0.0, a, AxiGrid())
    rho = np.array([0.3, 0.1, 0.5, 0.0])
    z = np.array([0.2, -0.6, 0.5, -0.3])
    d = np.hypot(rho, z - a)
    dstar = np.hypot(rho, z - 1 / a)
    exact = (1 / d - 1 / (a * dstar)) / (4 * math.pi)
    assert np.allclose(gf(rho, z), exact, rtol=0, atol=2e-4)


def test_axis_symmetry():
    up = robin_mass_at(-0.5, 1.0, 0.4, axis=1).robin_mass
    down = robin_mass_at(-0.5, 1.0, 0.4, axis=-1).robin_mass
    assert up == pytest.approx(down, abs=1e-9)


def test_radius_scaling():
    # R scales like 1/rho and lam like 1/rho^2
    one = robin_mass_at(-0.25, 2.0, 0.5).robin_mass
    two = robin_mass_at(-0.25, 0.5, 1.0, grid=AxiGrid(radius=2.0)).robin_mass
    assert two == pytest.approx(one / 2, rel=1e-8)


def test_mass_increases_with_lambda_and_hardy_weight_lowers_it():
    lams = [0.0, 2.0, 4.0]
    vals = [robin_mass_at(-0.5, lam, 0.5).robin_mass for lam in lams]
    assert vals[0] < vals[1] < vals[2]
    assert robin_mass_at(-0.5, 0.0, 0.5).robin_mass < images_robin(0.5)


def test_sup_at_centre_without_hardy_term():
    value, where = robin_sup(0.0, 0.0)
    assert where == pytest.approx(0.0, abs=1e-3)
    assert value == pytest.approx(-1.0, abs=1e-5)


def test_threshold_without_hardy_term():
    rep = lambda_star_merely_singular_3d(0.0)
    assert rep.lambda_star == pytest.approx(math.pi**2 / 4, rel=1e-5)


def test_validation():
    with pytest.raises(RegimeError):
        robin_mass_at(0.1, 0.0, 0.5)
    with pytest.raises(NotCoercive):
        robin_mass_at(0.0, 10.0, 0.5)
    with pytest.raises(PoleTooCloseToOrigin):
        robin_mass_at(-0.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        robin_mass_at(0.0, 0.0, 1.0)


@pytest.mark.parametrize("gamma,lam,a", [(0.0, 0.0, 0.5), (-0.5, 1.0, 0.3), (-0.25, 3.0, 0.7)])
def test_green_bounds(gamma, lam, a):
    rep = green_bound_check(gamma, lam, a, samples=100)
    assert rep.passed
    assert rep.near_pole_ratio == pytest.approx(1 / (4 * math.pi), rel=0.1)


def test_offcenter_bubble_guards():
    p = ProblemParams(3, -0.5)
    with pytest.raises(BubbleUnresolved):
        energy_of_offcenter_bubble(p, 0.5, 0.2)
    with pytest.raises(BubbleUnresolved):
        energy_of_offcenter_bubble(p, 0.5, 1e-5)


def test_offcenter_slope_tracks_robin_mass():
    # J = S - c R eps + O(eps^2 log): the slope has the opposite sign of R
    p = ProblemParams(3, 0.0, lam=0.0)
    fit = offcenter_expansion_slope(p, 0.5)
    r = images_robin(0.5)
    assert fit.slope / r == pytest.approx(-9.3, rel=0.05)
