"""Exception types raised across the package."""


class SoftLorentzError(Exception):
    """Base class for all package-specific errors."""


class InvalidRadius(SoftLorentzError):
    """Scatterer radius outside (0, 1/2): support must fit in the unit cell."""


class HorizonViolation(SoftLorentzError):
    """Lattice admits unbounded (or too long) free paths."""


class HorizonExceeded(SoftLorentzError):
    """A ray query found no scatterer within the certified horizon bound."""


class TrappedGuard(SoftLorentzError):
    """Interior boundary hits exceeded the safety cap during one visit."""


class StalledTrajectory(SoftLorentzError):
    """Momentum collapsed below the speed floor in free flight."""


class StepUnderflow(SoftLorentzError):
    """Adaptive integrator drove the step size below the resolvable floor."""


class QuadratureFailure(SoftLorentzError):
    """Adaptive quadrature failed to meet the requested tolerance."""


class DegenerateMomentum(SoftLorentzError):
    """Random-walk chain momentum fell below the degeneracy floor."""


class InsufficientData(SoftLorentzError):
    """Not enough samples for the requested estimator."""


class NonPositiveValue(SoftLorentzError):
    """Log-log fitting requires strictly positive values."""


class NotDiffusive(SoftLorentzError):
    """Requested window is not in the diffusive regime."""


class ExclusionRateExceeded(SoftLorentzError):
    """More than the allowed fraction of trajectories was flagged."""


class ConfigError(SoftLorentzError):
    """Malformed run configuration; carries the offending key."""

    def __init__(self, key, message):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key
