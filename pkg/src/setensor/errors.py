"""Exception types shared across the toolkit."""


class SetensorError(Exception):
    """Base class for all toolkit errors."""


class DimensionTooSmall(SetensorError):
    """Tensor dimension below the supported minimum (n >= 2)."""


class DimensionTooLarge(SetensorError):
    """Operation only supported for small dimensions (spectrum enumeration needs n <= 3)."""


class DimensionMismatch(SetensorError):
    """Array shapes incompatible with the tensor dimension."""


class NonFiniteEntry(SetensorError):
    """Tensor input contains NaN or infinite entries."""


class SymmetryViolation(SetensorError):
    """Input violates the elasticity index symmetries beyond tolerance.

    Carries the worst offending index quadruple (1-based) and the deviation.
    """

    def __init__(self, message, quadruple=None, deviation=None):
        super().__init__(message)
        self.quadruple = quadruple
        self.deviation = deviation


class NotNonnegative(SetensorError):
    """Operation requires a nonnegative tensor."""


class NoConvergence(SetensorError):
    """Iterative solver exhausted its budget without meeting the residual tolerance."""


class AsymmetricUnfolding(SetensorError):
    """Tensor unfolding is not symmetric, so a spectral projection is ill-defined."""


class NotPsd(SetensorError):
    """Matrix or unfolding expected to be positive semidefinite is not."""


class Asymmetric(SetensorError):
    """Matrix expected to be symmetric is not."""


class ConditionInapplicable(SetensorError):
    """Classification condition does not apply to this tensor (e.g. not a Z-pattern)."""


class ParseError(SetensorError):
    """Tensor file could not be parsed; message carries field context."""
