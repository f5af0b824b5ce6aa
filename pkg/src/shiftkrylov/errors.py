"""Exception types raised throughout the package."""


class ShiftKrylovError(Exception):
    """Base class for all package errors."""


class DimensionError(ShiftKrylovError):
    """Raised when operand dimensions are inconsistent (a caller bug)."""


class MatrixMarketError(ShiftKrylovError):
    """Raised on malformed Matrix Market input.

    Carries the offending line number when one is known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SingularMatrixError(ShiftKrylovError):
    """Raised when a triangular factor is exactly singular.

    ``column`` names the deficient column.
    """

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class NearSingularError(ShiftKrylovError):
    """Raised when a square solve meets a pivot that is singular to
    working precision, or a projector system is too ill conditioned."""


class BreakdownError(ShiftKrylovError):
    """Raised when every candidate direction of a block Arnoldi step is
    dependent and random replacement fails repeatedly."""


class CollinearityError(ShiftKrylovError):
    """Raised for collinearity-related applicability problems: a solver
    that requires collinear residuals got unrelated ones, a residual
    column is identically zero, or residuals stay collinear after all
    retries of a decollinearizing strategy."""


class EigenConvergenceError(ShiftKrylovError):
    """Raised when the eigensolver fails to converge.

    ``partial`` holds whatever pairs were computed, possibly none.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class ConfigError(ShiftKrylovError):
    """Raised for invalid experiment configuration."""
