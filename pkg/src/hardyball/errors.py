"""Exception types raised by the numerical routines."""


class HardyError(Exception):
    """Base class for all errors raised by :mod:`hardyball`."""


class AdmissibilityError(HardyError, ValueError):
    """Parameters violate the standing hypotheses (n, gamma, s, radius)."""


class RegimeError(HardyError, ValueError):
    """Operation requested outside the regime where it is defined."""


class ResonantIndicialGap(HardyError):
    """Frobenius recurrence hits an integer resonance of the indicial roots."""


class StepFailure(HardyError):
    """The adaptive ODE integrator could not meet its tolerance."""


class NonIntegrableSingularity(HardyError, ValueError):
    """Radial integrand is not integrable at the origin."""


class ResidualTooLarge(HardyError):
    """A pointwise verification residual exceeded its tolerance."""


class NotCoercive(HardyError):
    """The linear operator is not coercive on the domain."""


class NegativeCoercivity(NotCoercive):
    """lambda reached the first eigenvalue; the minimisation is undefined."""


class SignViolation(HardyError):
    """A function required to be positive changed sign."""


class PoleCrossing(HardyError, ValueError):
    """Bessel oracle evaluated beyond the first zero of J_nu."""


class NoSignChange(HardyError):
    """Root bracketing failed: no sign change on the search interval."""


class NonConvergence(HardyError):
    """Iteration budget exhausted without meeting the tolerance."""


class PoleTooCloseToOrigin(HardyError, ValueError):
    """Green's function pole is not resolved away from the Hardy singularity."""


class BubbleUnresolved(HardyError, ValueError):
    """Concentration scale is below what the quadrature can resolve."""


class NoAdmissibleBetaPrime(HardyError, ValueError):
    """No secondary exponent satisfies the sub/supersolution constraints."""
