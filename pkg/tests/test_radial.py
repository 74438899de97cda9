import math

import numpy as np
import pytest
from scipy import special

from hardyball.params import ProblemParams, compute_exponents
from hardyball.radial import (
    Branch,
    Grading,
    RadialFunction,
    assemble_operator,
    frobenius_solve,
    make_grid,
    quadrature,
    smallest_eigenpair,
    wronskian,
)


def test_grid_shapes():
    g = make_grid(2.0, 5, Grading.GEOMETRIC, r0=0.02)
    assert g.nodes[0] == 0.02 and g.nodes[-1] == 2.0
    assert np.allclose(np.diff(np.log(g.nodes)), math.log(100) / 4)
    r = g.refined()
    assert r.count == 9 and np.allclose(r.nodes[::2], g.nodes)
    u = make_grid(1.0, 3, Grading.UNIFORM, r0=0.5)
    assert np.allclose(u.nodes, [0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        make_grid(1.0, 1)
    with pytest.raises(ValueError):
        make_grid(1.0, 10, r0=2.0)


@pytest.mark.parametrize("q", [-1.5, 0.0, 2.0])
def test_quadrature_of_powers(q):
    # int_B r^q dx = omega r^{q+n}/(q+n) on the unit ball of R^3
    g = make_grid(1.0, 4001, r0=1e-6)
    f = RadialFunction(g, g.nodes**q, q)
    assert quadrature(f, 0.0, 3) == pytest.approx(4 * math.pi / (q + 3), rel=1e-6)


def _bessel_branch(n, gamma, lam, sign, r):
    """r^{-(n-2)/2} J_{+-nu}(k r), normalised to leading coefficient 1."""
    nu = compute_exponents(ProblemParams(n, gamma)).nu * sign
    k = math.sqrt(lam)
    return math.gamma(1 + nu) * (2 / k) ** nu * r ** (-(n - 2) / 2) * special.jv(nu, k * r)


@pytest.mark.parametrize("n,gamma,lam", [(3, 0.0, 2.0), (3, 0.2, 5.0), (4, 0.75, 1.0), (5, 2.0, 3.0)])
def test_frobenius_branches_match_bessel(n, gamma, lam):
    p = ProblemParams(n, gamma)
    r = np.array([0.05, 0.3, 0.7, 1.0])
    for branch, sign in ((Branch.MINUS, 1), (Branch.PLUS, -1)):
        sol = frobenius_solve(p, lam, branch)
        got = sol.evaluate(r)[0]
        assert np.allclose(got, _bessel_branch(n, gamma, lam, sign, r), rtol=1e-9)


def test_wronskian_is_constant():
    p = ProblemParams(3, 0.1)
    plus = frobenius_solve(p, 4.0, Branch.PLUS)
    minus = frobenius_solve(p, 4.0, Branch.MINUS)
    w = wronskian(3, plus, minus, np.linspace(0.01, 1.0, 9))
    assert np.allclose(w, compute_exponents(p).gap, rtol=1e-9)


def test_sturm_count_and_smallest_eigenpair_agree_with_dense():
    p = ProblemParams(3, 0.0)
    g = make_grid(1.0, 40, Grading.UNIFORM, r0=1e-3)
    pen = assemble_operator(p, 0.0, g)
    a, m = pen.dense()
    vals = np.sort(np.real(np.linalg.eigvals(np.linalg.solve(m, a))))
    for sigma in (5.0, 50.0, 200.0):
        assert pen.count_below(sigma) == int(np.sum(vals < sigma))
    ep = smallest_eigenpair(pen)
    assert ep.value == pytest.approx(vals[0], rel=1e-10)
    assert ep.vector @ pen.apply_m(ep.vector) == pytest.approx(1.0)
    assert np.all(ep.vector > 0)


def test_eigenvalue_converges_at_second_order():
    p = ProblemParams(3, 0.0)
    errs = []
    for count in (200, 400, 800):
        ep = smallest_eigenpair(assemble_operator(p, 0.0, make_grid(1.0, count)))
        errs.append(abs(ep.value - math.pi**2))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.05)
