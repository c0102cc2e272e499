"""Exception hierarchy shared across the toolkit."""


class TFRError(Exception):
    """Base class for every error raised by tfrbench."""


class ValidationError(TFRError, ValueError):
    pass


class DimensionError(ValidationError):
    pass


class RangeError(ValidationError):
    pass


class OverlapError(ValidationError):
    """Two heat-source footprints claim the same grid cell."""


class SingularSystemError(TFRError):
    """The discrete system has no Dirichlet or Robin face (constants span the null space)."""


class ConvergenceError(TFRError):
    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PlacementError(TFRError):
    pass


class EmptyMonitorError(TFRError, ValueError):
    pass


class FactorizationError(TFRError):
    pass


class DivergenceError(TFRError):
    pass


class EmptyListError(TFRError, ValueError):
    pass


class MissingTrainSetError(TFRError):
    pass


class ShapeMismatchError(TFRError):
    pass


class ConfigError(TFRError):
    pass


class FormatError(TFRError):
    """Malformed or unsupported binary container."""


class RankWarning(UserWarning):
    """Least-squares design matrix is rank deficient; a minimum-norm solution is returned."""
