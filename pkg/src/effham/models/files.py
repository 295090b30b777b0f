"""
Pydantic schemas for the JSON input files.

Complex entries are always two-element ``[re, im]`` arrays.
"""
from typing import List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ComplexEntry = List[float]
MatrixPayload = List[List[ComplexEntry]]


def payload_to_array(payload: MatrixPayload) -> np.ndarray:
    """Decode nested ``[re, im]`` entries into a complex matrix."""
    arr = np.array(payload, dtype=float)
    return arr[..., 0] + 1j * arr[..., 1]


def _check_matrix(payload: MatrixPayload, rows: Optional[int] = None) -> MatrixPayload:
    if not payload or any(len(row) != len(payload) for row in payload):
        raise ValueError("matrix must be square and nonempty")
    if rows is not None and len(payload) != rows:
        raise ValueError(f"matrix must be {rows}x{rows}")
    for row in payload:
        for entry in row:
            if len(entry) != 2:
                raise ValueError("complex entries must be [re, im] pairs")
    return payload


class MatrixFile(BaseModel):
    """A bare matrix, used for states and invariants"""
    matrix: MatrixPayload

    @field_validator("matrix")
    @classmethod
    def _square(cls, value: MatrixPayload) -> MatrixPayload:
        return _check_matrix(value)


class ModelFile(BaseModel):
    """Markovian model file"""
    model_config = ConfigDict(extra="forbid")

    dim: int = Field(..., ge=1, le=8)
    hamiltonian: MatrixPayload
    lindblad_ops: List[MatrixPayload] = Field(default_factory=list)

    @model_validator(mode="after")
    def _shapes(self) -> "ModelFile":
        _check_matrix(self.hamiltonian, self.dim)
        for op in self.lindblad_ops:
            _check_matrix(op, self.dim)
        return self


class TransitionFile(BaseModel):
    """One transfer operator of a generalized model"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    to_k: int = Field(..., ge=0)
    from_j: int = Field(..., ge=0)
    channel: int = Field(0, ge=0, alias="lambda")
    matrix: MatrixPayload


class GeneralizedModelFile(BaseModel):
    """Generalized model file"""
    model_config = ConfigDict(extra="forbid")

    dim: int = Field(..., ge=1, le=8)
    components: int = Field(..., ge=1)
    hamiltonians: List[MatrixPayload]
    transitions: List[TransitionFile] = Field(default_factory=list)

    @model_validator(mode="after")
    def _shapes(self) -> "GeneralizedModelFile":
        if len(self.hamiltonians) != self.components:
            raise ValueError(f"expected {self.components} hamiltonians, got {len(self.hamiltonians)}")
        if self.components * self.dim ** 2 > 64:
            raise ValueError("components * dim^2 must not exceed 64")
        for h in self.hamiltonians:
            _check_matrix(h, self.dim)
        for tr in self.transitions:
            _check_matrix(tr.matrix, self.dim)
        return self


class GeneratorFile(BaseModel):
    """Sampled generator trajectory"""
    model_config = ConfigDict(extra="forbid")

    times: List[float] = Field(..., min_length=2)
    matrices: List[MatrixPayload]
    midpoints: Optional[List[MatrixPayload]] = None

    @model_validator(mode="after")
    def _lengths(self) -> "GeneratorFile":
        if len(self.matrices) != len(self.times):
            raise ValueError("one matrix per time is required")
        if self.midpoints is not None and len(self.midpoints) != len(self.times) - 1:
            raise ValueError("one midpoint matrix per interval is required")
        return self


class AxisSpec(BaseModel):
    """Evenly spaced axis, endpoints included"""
    start: float
    stop: float
    num: int = Field(..., ge=0)

    def values(self) -> List[float]:
        return np.linspace(self.start, self.stop, self.num).tolist()


class ScanConfigFile(BaseModel):
    """Adiabaticity scan configuration"""
    model_config = ConfigDict(extra="forbid")

    gamma1_T: Union[AxisSpec, List[float]]
    dgamma1_T: Union[AxisSpec, List[float]]
    gamma2_T: float = Field(1.0, gt=0)
    dgamma2_T: float = 1.0
    T: float = Field(1.0, gt=0)
    steps: int = Field(200, ge=100)
    floor: float = Field(1e-3, gt=0)
    initial: Union[Literal["A03"], List[MatrixPayload]] = "A03"

    def axis(self, name: str) -> List[float]:
        spec = getattr(self, name)
        return spec.values() if isinstance(spec, AxisSpec) else list(spec)


class BasisFile(BaseModel):
    """Candidate decoherence-free basis, one N x N matrix per vector"""
    model_config = ConfigDict(extra="forbid")

    basis: List[MatrixPayload] = Field(..., min_length=1)

    @field_validator("basis")
    @classmethod
    def _square(cls, value: List[MatrixPayload]) -> List[MatrixPayload]:
        for m in value:
            _check_matrix(m, len(value[0]))
        return value
