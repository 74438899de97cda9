import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardyball.errors import AdmissibilityError
from hardyball.params import (
    ProblemParams,
    SingularityKind,
    classify_regime,
    compute_exponents,
    critical_dimension,
    critical_exponent,
    indicial_roots,
    is_low_dimensional,
    unit_sphere_area,
)


@st.composite
def admissible(draw):
    n = draw(st.integers(3, 12))
    top = (n - 2) ** 2 / 4.0
    gamma = draw(st.floats(-10.0, top, exclude_max=True, allow_nan=False))
    return n, gamma


@given(admissible())
@settings(max_examples=200, deadline=None)
def test_roots_annihilate_the_indicial_polynomial(case):
    n, gamma = case
    bm, bp = indicial_roots(n, gamma)
    for b in (bm, bp):
        assert abs(b * (n - 2 - b) - gamma) < 1e-12 * max(1.0, abs(gamma))
    assert abs(bm + bp - (n - 2)) < 1e-12
    assert bm < (n - 2) / 2 < bp


@given(admissible())
@settings(max_examples=100, deadline=None)
def test_product_of_roots_is_gamma(case):
    n, gamma = case
    bm, bp = indicial_roots(n, gamma)
    assert bm * bp == pytest.approx(gamma, abs=1e-11)


def test_known_exponents():
    e = compute_exponents(ProblemParams(3, 0.0))
    assert (e.beta_minus, e.beta_plus, e.gap) == (0.0, 1.0, 1.0)
    assert e.two_star_s == 6.0
    e = compute_exponents(ProblemParams(4, 0.75, s=1.0))
    assert e.beta_minus == pytest.approx(0.5)
    assert e.beta_plus == pytest.approx(1.5)
    assert e.two_star_s == pytest.approx(3.0)


def test_critical_exponent_and_dimension():
    assert critical_exponent(5, 0.0) == pytest.approx(10 / 3)
    assert critical_exponent(3, 2.0) == pytest.approx(2.0)
    assert critical_dimension(0.0) == pytest.approx(4.0)
    assert critical_dimension(-1.0) == pytest.approx(2.0)
    assert critical_dimension(-3.0) == 2.0


@pytest.mark.parametrize("n,gamma,low", [(3, 0.0, True), (4, 0.0, False), (4, 0.5, True),
                                         (5, 1.25, False), (5, 1.3, True), (3, -1.0, False)])
def test_low_dimensional_iff_gap_below_two(n, gamma, low):
    assert is_low_dimensional(n, gamma) is low


def test_low_dimensional_matches_critical_dimension():
    # gap < 2 exactly when n < n_gamma
    for n in range(3, 9):
        for gamma in (-0.9, -0.5, 0.0, 0.5, 1.5, 3.0):
            if gamma >= (n - 2) ** 2 / 4:
                continue
            assert is_low_dimensional(n, gamma) == (n < critical_dimension(gamma) - 1e-9)


def test_regime_tags():
    assert classify_regime(ProblemParams(3, 0.1)).kind is SingularityKind.TRULY_SINGULAR
    assert classify_regime(ProblemParams(3, 0.0, s=0.5)).truly_singular
    tag = classify_regime(ProblemParams(3, -0.5))
    assert tag.kind is SingularityKind.MERELY_SINGULAR and tag.low_dimensional


@pytest.mark.parametrize("kwargs", [dict(n=2, gamma=0.0), dict(n=3, gamma=0.25), dict(n=3, gamma=0.0, s=2.0),
                                    dict(n=3, gamma=0.0, ball_radius=0.0), dict(n=3.5, gamma=0.0)])
def test_inadmissible_parameters(kwargs):
    with pytest.raises(AdmissibilityError):
        ProblemParams(**kwargs)


def test_sphere_area():
    assert unit_sphere_area(3) == pytest.approx(4 * math.pi)
    assert unit_sphere_area(2) == pytest.approx(2 * math.pi)
    assert unit_sphere_area(4) == pytest.approx(2 * math.pi**2)
