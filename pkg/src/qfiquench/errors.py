"""Exception types raised by the library."""


class QfiQuenchError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(QfiQuenchError, ValueError):
    pass


class SingularModeError(QfiQuenchError, ValueError):
    """A mode with vanishing dispersion was requested (g = 1, k = 0)."""


class NumericalFailureError(QfiQuenchError, RuntimeError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class TailNotConvergedError(NumericalFailureError):
    """Correlator series tail is not small enough; carries the partial sum."""

    def __init__(self, message, partial_value, residual):
        super().__init__(message, {"partial_value": partial_value, "residual": residual})
        self.partial_value = partial_value
        self.residual = residual


class ConvergenceFailureError(NumericalFailureError):
    """Chain-length doubling hit its cap; ``trace`` holds (L, f_Q) iterates."""

    def __init__(self, message, trace):
        super().__init__(message, {"trace": trace})
        self.trace = trace


class ResourceError(QfiQuenchError, MemoryError):
    pass
