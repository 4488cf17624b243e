"""Exception types raised across the package."""


class DvbgkError(Exception):
    """Base class for all package errors."""


class InvalidConfig(DvbgkError):
    """A configuration value is out of its allowed range."""


class CutoffTooSmall(InvalidConfig):
    """Velocity cutoff too small: the discrete background Maxwellian loses mass."""


class DegenerateState(DvbgkError):
    """Non-positive density or temperature in at least one spatial cell."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class NewtonDivergence(DvbgkError):
    """Moment-matching Newton iteration failed to converge."""

    def __init__(self, message, cell=None, residual=None):
        super().__init__(message)
        self.cell = cell
        self.residual = residual


class GridMismatch(DvbgkError):
    """Two objects built on different phase-space grids were combined."""


class RankDeficiency(DvbgkError):
    """Sampled basis functions are numerically linearly dependent."""


class GramSingular(DvbgkError):
    """Gram matrix of the hydrodynamic basis is numerically singular."""


class OrderTooHighForGrid(DvbgkError):
    """Requested derivative order exceeds what the grid stencil supports."""


class NonPositiveValue(DvbgkError):
    """A strictly positive series value was expected (e.g. for log fitting)."""


class NegativeDensityValue(DvbgkError):
    """Distribution values below the tolerated roundoff floor."""


class ZeroField(DvbgkError):
    """An operation requiring a nontrivial field received (numerically) zero."""


class PositivityViolation(DvbgkError):
    """Initial data would produce a negative distribution function."""


class NonFiniteState(DvbgkError):
    """NaN or Inf detected in the evolving field."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ParseError(DvbgkError):
    """Configuration file could not be parsed."""


class ValidationError(DvbgkError):
    """Configuration parsed but violates one or more constraints."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CheckpointError(DvbgkError):
    """Checkpoint file is malformed or inconsistent with the grid."""
