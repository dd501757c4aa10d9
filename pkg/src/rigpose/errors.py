"""Exception types shared across the package."""


class RigposeError(Exception):
    """Base class for all rigpose errors."""


class InvalidRotationError(RigposeError, ValueError):
    """Matrix is not orthonormal with determinant +1 within tolerance."""


class NonUnitVectorError(RigposeError, ValueError):
    """Vector expected to be unit-norm is not (inputs are never renormalized silently)."""


class NonFiniteInputError(RigposeError, ValueError):
    """Scalar or array input contains NaN or infinity."""


class CameraIndexError(RigposeError, IndexError):
    """Camera index outside the rig's dense 0..N-1 range."""


class UndefinedDirectionError(RigposeError, ValueError):
    """Direction comparison requested on a (near-)zero-norm vector."""


class InsufficientCorrespondencesError(RigposeError, ValueError):
    """Fewer correspondences than the operation requires."""


class InsufficientCameraDiversityError(RigposeError, ValueError):
    """Correspondence set spans fewer distinct cameras than sampling requires."""


class InfeasibleSceneError(RigposeError, RuntimeError):
    """Scenario configuration admits no visible scene points."""


class ParseError(RigposeError, ValueError):
    """Input file failed to parse; message names the offending line."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
