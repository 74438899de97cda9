"""
Hardy-Schroedinger critical problem on the ball.

Exponents and extremals on the whole space, eigenvalues and ground states of
the radial problem, the Hardy-singular interior mass and the threshold it
defines, and the Robin mass of the 3-d ball in the merely singular case.
"""

from .errors import HardyError
from .extremals import compute_chi, compute_mu_rn, energy_of_test_function, expansion_slope, make_test_function
from .mass import interior_mass, lambda_star_by_mass, mass_oracle_bessel, pohozaev_residual, subsupersolution_check
from .params import ProblemParams, classify_regime, compute_exponents
from .robin3d import AxiGrid, lambda_star_merely_singular_3d, robin_mass_at, robin_sup
from .spectral import ground_state, janelli_lambda_star, lambda1

__version__ = "0.1.0"

__all__ = [
    "AxiGrid",
    "HardyError",
    "ProblemParams",
    "classify_regime",
    "compute_chi",
    "compute_exponents",
    "compute_mu_rn",
    "energy_of_test_function",
    "expansion_slope",
    "ground_state",
    "interior_mass",
    "janelli_lambda_star",
    "lambda1",
    "lambda_star_by_mass",
    "lambda_star_merely_singular_3d",
    "make_test_function",
    "mass_oracle_bessel",
    "pohozaev_residual",
    "robin_mass_at",
    "robin_sup",
    "subsupersolution_check",
]
