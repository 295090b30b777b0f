"""
Error types raised by effham.

Every error carries:
- A human readable message
- A stable machine readable code (used by the CLI diagnostics)
- The offending field, when one can be named
"""

from typing import Any, Dict, Optional


class EffHamError(Exception):
    """Base exception for all domain errors."""

    default_code = "EFFHAM_ERROR"

    def __init__(
        self, message: str, code: Optional[str] = None, field: Optional[str] = None
    ):
        """
        Initialize a domain error.

        Args:
            message: Error message
            code: Error code; defaults to the class code
            field: Name of the offending input, if any
        """
        self.message = message
        self.code = code or self.default_code
        self.field = field
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary for JSON diagnostics."""
        return {"error": self.code, "message": self.message, "field": self.field}


class DimensionMismatch(EffHamError):
    """Operands have incompatible shapes."""

    default_code = "DIMENSION_MISMATCH"


class BadLength(EffHamError):
    """A composite vector length is not a perfect square."""

    default_code = "BAD_LENGTH"


class NonDiagonalizable(EffHamError):
    """An eigen-cluster has fewer independent eigenvectors than its multiplicity."""

    default_code = "NON_DIAGONALIZABLE"


class NotAState(EffHamError):
    """Input is not a density matrix."""

    default_code = "NOT_A_STATE"


class ModelInvariantError(EffHamError):
    """A model record violates one of its invariants."""

    default_code = "MODEL_INVARIANT"


class PreconditionError(EffHamError):
    """An operation was called outside its domain."""

    default_code = "PRECONDITION"


class DependentBasis(EffHamError):
    """Candidate basis vectors are linearly dependent."""

    default_code = "DEPENDENT_BASIS"


class NotHermitianSymmetric(EffHamError):
    """A composite vector does not unvectorize to a Hermitian matrix."""

    default_code = "NOT_HERMITIAN_SYMMETRIC"


class StepTooCoarse(EffHamError):
    """Time grid is too coarse for the invariant integrator."""

    default_code = "STEP_TOO_COARSE"


class DegenerateTrack(EffHamError):
    """An eigen-track passes through a degenerate cluster."""

    default_code = "DEGENERATE_TRACK"


class ZeroOverlap(EffHamError):
    """Initial and final track vectors are orthogonal."""

    default_code = "ZERO_OVERLAP"


class AllDegenerate(EffHamError):
    """The spectrum forms a single cluster."""

    default_code = "ALL_DEGENERATE"


class EmptyGrid(EffHamError):
    """A scan axis has no points."""

    default_code = "EMPTY_GRID"


class ModelFileError(EffHamError):
    """An input file could not be parsed or validated."""

    default_code = "MODEL_FILE"


__all__ = [
    "EffHamError",
    "DimensionMismatch",
    "BadLength",
    "NonDiagonalizable",
    "NotAState",
    "ModelInvariantError",
    "PreconditionError",
    "DependentBasis",
    "NotHermitianSymmetric",
    "StepTooCoarse",
    "DegenerateTrack",
    "ZeroOverlap",
    "AllDegenerate",
    "EmptyGrid",
    "ModelFileError",
]
