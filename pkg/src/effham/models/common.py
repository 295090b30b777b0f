"""
Shared helpers for the numpy-backed domain records.
"""
from typing import Any, Dict, List

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..exceptions import DimensionMismatch, ModelInvariantError
from ..utils.numerics import as_cmatrix, frozen


class ArrayRecord(BaseModel):
    """Immutable record holding numpy payloads"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


def checked_operator(value: Any, name: str, dim: int) -> np.ndarray:
    """Convert ``value`` to a read-only ``dim`` x ``dim`` complex matrix."""
    arr = as_cmatrix(value, name)
    if arr.shape != (dim, dim):
        raise DimensionMismatch(
            f"{name} must be {dim}x{dim}, got {arr.shape}", field=name
        )
    return frozen(arr)


def checked_hermitian(value: Any, name: str, tol: float) -> np.ndarray:
    """Convert ``value`` to a square read-only matrix and check Hermiticity."""
    arr = as_cmatrix(value, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got {arr.shape}", field=name)
    defect = float(np.max(np.abs(arr - arr.conj().T))) if arr.size else 0.0
    if defect > tol:
        raise ModelInvariantError(
            f"{name} is not Hermitian (defect {defect:.3e})", field=name
        )
    return frozen(arr)


def complex_pair(z: complex) -> List[float]:
    """Encode a complex number as ``[re, im]``."""
    return [float(np.real(z)), float(np.imag(z))]


def matrix_payload(a: np.ndarray) -> List[List[List[float]]]:
    """Encode a matrix as nested ``[re, im]`` entries."""
    return [[complex_pair(z) for z in row] for row in np.asarray(a)]


def complex_list(values: Any) -> List[List[float]]:
    return [complex_pair(z) for z in np.asarray(values).ravel()]


def to_jsonable(mapping: Dict[str, Any]) -> Dict[str, Any]:
    """Replace numpy scalars by Python floats/bools."""
    out: Dict[str, Any] = {}
    for key, value in mapping.items():
        if isinstance(value, np.bool_):
            out[key] = bool(value)
        elif isinstance(value, np.floating):
            out[key] = float(value)
        else:
            out[key] = value
    return out
