"""
Problem parameters for the Hardy-Schrodinger Dirichlet problem on a ball.

The operator is ``L_gamma = -Delta - gamma/|x|^2`` in dimension ``n`` with the
Hardy-Sobolev weight ``|x|^{-s}`` on the critical term.  Everything here is a
closed formula of (n, gamma, s); no arrays of dimension ``n`` are ever built.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .errors import AdmissibilityError

# gap within this distance of 2 counts as the borderline (high-dimensional) case
GAP_BORDER_TOL = 1e-12


class SingularityKind(enum.Enum):
    TRULY_SINGULAR = "TrulySingular"
    MERELY_SINGULAR = "MerelySingular"


@dataclass(frozen=True)
class ProblemParams:
    """Dimension, Hardy coefficient, weight exponent, linear term and ball radius."""

    n: int
    gamma: float
    s: float = 0.0
    lam: float = 0.0
    ball_radius: float = 1.0

    def __post_init__(self):
        if int(self.n) != self.n:
            raise AdmissibilityError(f"n must be an integer, got {self.n!r}")
        if self.n < 3:
            raise AdmissibilityError(f"n must be >= 3, got {self.n}")
        hardy = (self.n - 2) ** 2 / 4.0
        if not self.gamma < hardy:
            raise AdmissibilityError(
                f"gamma={self.gamma} must be below the Hardy constant (n-2)^2/4={hardy}"
            )
        if not 0.0 <= self.s < 2.0:
            raise AdmissibilityError(f"s must lie in [0, 2), got {self.s}")
        if not self.ball_radius > 0.0:
            raise AdmissibilityError(f"ball_radius must be positive, got {self.ball_radius}")
        if not all(math.isfinite(v) for v in (self.gamma, self.lam, self.ball_radius)):
            raise AdmissibilityError("parameters must be finite")
        object.__setattr__(self, "n", int(self.n))

    @property
    def hardy_constant(self) -> float:
        return (self.n - 2) ** 2 / 4.0

    def with_(self, **changes) -> "ProblemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Exponents:
    beta_minus: float
    beta_plus: float
    gap: float
    two_star_s: float
    nu: float
    n_crit: float


@dataclass(frozen=True)
class RegimeTag:
    kind: SingularityKind
    low_dimensional: bool

    @property
    def truly_singular(self) -> bool:
        return self.kind is SingularityKind.TRULY_SINGULAR


def indicial_roots(n: int, gamma: float) -> tuple[float, float]:
    """Return ``(beta_minus, beta_plus)``: the exponents with ``|x|^{-beta}`` in ker L_gamma."""
    half = (n - 2) / 2.0
    disc = half * half - gamma
    if disc <= 0.0:
        raise AdmissibilityError(f"gamma={gamma} is not below (n-2)^2/4 for n={n}")
    root = math.sqrt(disc)
    return half - root, half + root


def critical_exponent(n: int, s: float) -> float:
    """Hardy-Sobolev critical exponent ``2*(s) = 2(n-s)/(n-2)``."""
    return 2.0 * (n - s) / (n - 2)


def critical_dimension(gamma: float) -> float:
    """Critical dimension n_gamma: ``2 sqrt(gamma+1) + 2`` for gamma >= -1, else 2."""
    if gamma >= -1.0:
        return 2.0 * math.sqrt(gamma + 1.0) + 2.0
    return 2.0


def compute_exponents(p: ProblemParams) -> Exponents:
    bm, bp = indicial_roots(p.n, p.gamma)
    gap = bp - bm
    return Exponents(
        beta_minus=bm,
        beta_plus=bp,
        gap=gap,
        two_star_s=critical_exponent(p.n, p.s),
        nu=gap / 2.0,
        n_crit=critical_dimension(p.gamma),
    )


def is_low_dimensional(n: int, gamma: float) -> bool:
    """True iff ``beta_+ - beta_- < 2``; the borderline gap == 2 is high-dimensional."""
    bm, bp = indicial_roots(n, gamma)
    return (bp - bm) < 2.0 - GAP_BORDER_TOL


def classify_regime(p: ProblemParams) -> RegimeTag:
    truly = p.s > 0.0 or p.gamma > 0.0
    kind = SingularityKind.TRULY_SINGULAR if truly else SingularityKind.MERELY_SINGULAR
    return RegimeTag(kind=kind, low_dimensional=is_low_dimensional(p.n, p.gamma))


def unit_sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n (``omega_{n-1}``)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
