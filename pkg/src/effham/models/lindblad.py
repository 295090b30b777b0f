"""
Markovian domain records: models, composite states, effective
Hamiltonians, damping bases and DDFS reports.
"""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from ..config import get_settings
from ..exceptions import BadLength, DimensionMismatch
from ..utils.numerics import frozen
from .common import (
    ArrayRecord,
    checked_hermitian,
    checked_operator,
    complex_list,
    complex_pair,
    matrix_payload,
)


class LindbladModel(ArrayRecord):
    """Hamiltonian plus Lindblad operators of a Markovian master equation"""
    hamiltonian: np.ndarray = Field(..., description="N x N Hermitian Hamiltonian")
    lindblad_ops: Tuple[np.ndarray, ...] = Field(
        default=(), description="N x N jump operators (rate^1/2 units)"
    )

    @field_validator("hamiltonian", mode="before")
    @classmethod
    def _check_hamiltonian(cls, value: Any) -> np.ndarray:
        return checked_hermitian(value, "hamiltonian", get_settings().tol_hermitian)

    @model_validator(mode="before")
    @classmethod
    def _check_ops(cls, data: Any) -> Any:
        if isinstance(data, dict) and "lindblad_ops" in data:
            dim = np.shape(data.get("hamiltonian"))[0]
            data = dict(data)
            data["lindblad_ops"] = tuple(
                checked_operator(op, f"lindblad_ops[{k}]", dim)
                for k, op in enumerate(data["lindblad_ops"])
            )
        return data

    @property
    def dim(self) -> int:
        return int(self.hamiltonian.shape[0])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "hamiltonian": matrix_payload(self.hamiltonian),
            "lindblad_ops": [matrix_payload(op) for op in self.lindblad_ops],
        }


class CompositeState(ArrayRecord):
    """Vectorized density matrix; amplitude ``m*N + n`` holds ``rho[m, n]``"""
    dim: int = Field(..., ge=1, description="System dimension N")
    amplitudes: np.ndarray = Field(..., description="Length N^2 complex vector")

    @model_validator(mode="before")
    @classmethod
    def _check_length(cls, data: Any) -> Any:
        if isinstance(data, dict):
            amps = np.array(data.get("amplitudes"), dtype=np.complex128).ravel()
            dim = data.get("dim")
            if dim is None:
                dim = int(round(np.sqrt(amps.size)))
            if dim * dim != amps.size:
                raise BadLength(
                    f"Composite vector of length {amps.size} does not match dim {dim}",
                    field="amplitudes",
                )
            data = {"dim": dim, "amplitudes": frozen(amps)}
        return data

    @property
    def norm_squared(self) -> float:
        """``<Psi|Psi>``, equal to the purity of the underlying state."""
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


class EffectiveHamiltonian(ArrayRecord):
    """Non-Hermitian generator on the doubled space"""
    matrix: np.ndarray
    source: LindbladModel

    @model_validator(mode="after")
    def _check_shape(self) -> "EffectiveHamiltonian":
        n2 = self.source.dim ** 2
        if self.matrix.shape != (n2, n2):
            raise DimensionMismatch(
                f"Effective Hamiltonian must be {n2}x{n2}", field="matrix"
            )
        self.matrix.setflags(write=False)
        return self


class DampingBasis(ArrayRecord):
    """Right eigen-operators A and dual left eigen-operators B of the Liouvillian"""
    eigenvalues: np.ndarray
    right_ops: Tuple[np.ndarray, ...]
    left_ops: Tuple[np.ndarray, ...]
    system: Optional[Any] = Field(None, description="Underlying EigenSystem of -i H_T")

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    def pairing(self) -> np.ndarray:
        """Matrix of ``Tr(A_mu B_nu)``."""
        a = np.stack(self.right_ops)
        b = np.stack(self.left_ops)
        return np.einsum("mab,nba->mn", a, b)

    def steady_members(self, tol: float = 1e-9) -> List[int]:
        """Indices of zero-eigenvalue members."""
        return [i for i, lam in enumerate(self.eigenvalues) if abs(lam) <= tol]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eigenvalues": complex_list(self.eigenvalues),
            "right_ops": [matrix_payload(a) for a in self.right_ops],
            "left_ops": [matrix_payload(b) for b in self.left_ops],
        }


class SteadyState(ArrayRecord):
    """Hermitized null vector of the effective Hamiltonian"""
    matrix: np.ndarray
    traceless: bool = Field(False, description="True if the trace vanishes (left unnormalized)")

    def to_dict(self) -> Dict[str, Any]:
        return {"matrix": matrix_payload(self.matrix), "traceless": self.traceless}


class DDFSReport(ArrayRecord):
    """Outcome of a decoherence-free subspace check"""
    betas: Dict[str, complex] = Field(default_factory=dict, description="Fitted common eigenvalues per operator label")
    eigen_residuals: Dict[str, float] = Field(default_factory=dict, description="Max common-eigenvector residual per label")
    invariance_defect: float = 0.0
    purity_rates: List[float] = Field(default_factory=list)
    tol: float
    verdict: bool

    @property
    def max_residual(self) -> float:
        values = list(self.eigen_residuals.values()) + [self.invariance_defect]
        values += [abs(r) for r in self.purity_rates]
        return max(values) if values else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict,
            "tol": self.tol,
            "betas": {k: complex_pair(v) for k, v in self.betas.items()},
            "eigen_residuals": dict(self.eigen_residuals),
            "invariance_defect": self.invariance_defect,
            "purity_rates": list(self.purity_rates),
        }
