"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class InsufficientDataError(DomainError):
    """Not enough data to compute the requested quantity."""


class TrajectoryFormatError(ValueError):
    """A trajectory file is malformed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GapFillError(ValueError):
    """Missing samples cannot be filled (boundary or oversized gaps)."""


class QuadratureError(ArithmeticError):
    """Numerical integration did not reach the requested accuracy."""


class TrainingError(RuntimeError):
    """SVM training failed to converge."""

    def __init__(self, message, kkt_residual=None):
        super().__init__(message)
        self.kkt_residual = kkt_residual


class ExperimentError(RuntimeError):
    """An experiment step failed; the message names trial, sensor and window."""
