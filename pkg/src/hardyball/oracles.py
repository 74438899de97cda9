"""
Closed-form reference values used to cross-check the numerical routines.

Nothing in here touches a grid: Bessel zeros, the Sobolev constant, the
method-of-images Robin function of the unit ball in R^3 and the constant-potential
radial mass of the 3-d ball.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy import optimize, special


@lru_cache(maxsize=256)
def first_bessel_zero(order: float) -> float:
    """First positive zero of ``J_order`` for ``order > -1``.

    For negative orders ``J_order(x) ~ x^order`` blows up at 0, and the zero
    moves to 0 as ``order -> -1``, so the scan starts on a log-spaced grid.
    """
    if order <= -1.0:
        raise ValueError(f"order must exceed -1, got {order}")
    xs = np.concatenate([np.geomspace(1e-10, 0.5, 400), np.linspace(0.5, order + 10.0 + 3 * abs(order), 4000)[1:]])
    f = special.jv(order, xs)
    idx = np.nonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0)[0]
    if len(idx) == 0:
        raise RuntimeError(f"no zero of J_{order} found in the scan range")
    i = idx[0]
    return optimize.brentq(lambda x: special.jv(order, x), xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15)


def lambda1_ball_oracle(nu: float, radius: float = 1.0) -> float:
    """``(j_{nu,1} / radius)^2``, first Dirichlet eigenvalue of the radial Hardy operator."""
    return (first_bessel_zero(nu) / radius) ** 2


def lambda_star_ball_oracle(nu: float, radius: float = 1.0) -> float:
    """``(j_{-nu,1} / radius)^2``, the zero of the constant-potential mass."""
    return (first_bessel_zero(-nu) / radius) ** 2


def sobolev_constant(n: int) -> float:
    """Best constant of ``|grad u|_2^2 >= S |u|_{2*}^2`` on R^n: ``n(n-2)/4 |S^n|^{2/n}``."""
    sphere = 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)
    return n * (n - 2) / 4.0 * sphere ** (2.0 / n)


def images_robin_mass(pole_radius: float) -> float:
    """Regular part of the Dirichlet Green function of the unit ball at its pole.

    With ``G = (1/4pi)(1/|x-x0| + R) + o(1)`` the image charge gives
    ``R = -1 / (1 - |x0|^2)``.
    """
    return -1.0 / (1.0 - pole_radius**2)


def radial_mass_3d(lam: float, radius: float = 1.0) -> float:
    """``-sqrt(lam) cot(sqrt(lam) radius)`` (3-d ball, gamma = 0, h = lam); ``-1/radius`` at lam = 0."""
    if lam == 0.0:
        return -1.0 / radius
    k = math.sqrt(lam)
    return -k / math.tan(k * radius)
