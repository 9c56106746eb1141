"""Exception and warning types shared across the package."""


class AttractorLabError(Exception):
    """Base class for all errors raised by this package."""


class TruncationError(AttractorLabError):
    """A retained eigenfunction does not vanish at the artificial grid wall."""


class ResolutionError(AttractorLabError):
    """The grid cannot resolve the requested number of modes."""


class ZeroMassError(AttractorLabError):
    """A phase-space distribution integrates to zero."""


class GridError(AttractorLabError):
    """Momentum and position grids are incompatible (aliasing)."""


class HermiticityError(AttractorLabError):
    """A kernel or matrix that must be Hermitian is not."""


class NonHermitianError(HermiticityError):
    """An expectation value was requested with a non-Hermitian input."""


class IdentityViolation(AttractorLabError):
    """A structural identity of the coupling tensor failed."""


class DimensionMismatch(AttractorLabError, ValueError):
    """Array dimensions of combined objects disagree."""


class ConvergenceError(AttractorLabError):
    """Adaptive quadrature did not reach its tolerance."""


class StiffnessError(AttractorLabError):
    """The adaptive integrator step size collapsed."""


class NotConverged(AttractorLabError):
    """A flow trajectory did not settle onto a fixed point."""


class PeriodUndefined(AttractorLabError):
    """The limit-cycle period is infinite (zero eigenvalue)."""


class MismatchError(AttractorLabError):
    """A serialized object does not belong to the basis it is loaded against."""


class ConfigError(AttractorLabError):
    """A scenario configuration is unparseable or inconsistent."""


class TruncationWarning(UserWarning):
    """The spectral basis misses a noticeable part of a kernel."""


class DegenerateTopEigenvalue(RuntimeWarning):
    """The two largest eigenvalues of the initial matrix coincide."""


class AsymptoticWindowWarning(RuntimeWarning):
    """The source matrix never became quasi-stationary before t_max."""
