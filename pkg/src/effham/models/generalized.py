"""
Generalized (multi-component) Lindblad records.
"""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import Field, field_validator, model_validator

from ..config import get_settings
from ..exceptions import BadLength, DimensionMismatch, ModelInvariantError
from ..utils.numerics import as_cmatrix, frozen
from .common import ArrayRecord, checked_hermitian, checked_operator, complex_list, matrix_payload


class Transition(ArrayRecord):
    """Transfer operator R_{kj}^lambda moving weight from component j to component k"""
    to_k: int = Field(..., ge=0, description="Receiving component")
    from_j: int = Field(..., ge=0, description="Source component")
    channel: int = Field(0, ge=0, description="Channel index lambda")
    matrix: np.ndarray

    @field_validator("matrix", mode="before")
    @classmethod
    def _as_matrix(cls, value: Any) -> np.ndarray:
        return frozen(as_cmatrix(value, "matrix"))

    @property
    def key(self) -> Tuple[int, int, int]:
        return (self.to_k, self.from_j, self.channel)


class GeneralizedLindbladModel(ArrayRecord):
    """K component Hamiltonians plus inter-component transfer operators"""
    hamiltonians: Tuple[np.ndarray, ...]
    transitions: Tuple[Transition, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _check_operators(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        tol = get_settings().tol_hermitian
        hams = tuple(
            checked_hermitian(h, f"hamiltonians[{k}]", tol)
            for k, h in enumerate(data.get("hamiltonians", ()))
        )
        if not hams:
            raise ModelInvariantError("At least one component is required", field="hamiltonians")
        dim = hams[0].shape[0]
        for k, h in enumerate(hams):
            if h.shape != (dim, dim):
                raise DimensionMismatch(
                    f"hamiltonians[{k}] must be {dim}x{dim}", field=f"hamiltonians[{k}]"
                )

        transitions = []
        seen = set()
        for i, tr in enumerate(data.get("transitions", ())):
            if isinstance(tr, dict):
                tr = dict(tr)
                tr["matrix"] = checked_operator(tr["matrix"], f"transitions[{i}].matrix", dim)
                tr = Transition(**tr)
            elif tr.matrix.shape != (dim, dim):
                raise DimensionMismatch(
                    f"transitions[{i}].matrix must be {dim}x{dim}", field=f"transitions[{i}]"
                )
            if tr.to_k >= len(hams) or tr.from_j >= len(hams):
                raise ModelInvariantError(
                    f"transitions[{i}] refers to a component outside [0, {len(hams)})",
                    field=f"transitions[{i}]",
                )
            if tr.key in seen:
                raise ModelInvariantError(
                    f"Duplicate transition {tr.key}", field=f"transitions[{i}]"
                )
            seen.add(tr.key)
            transitions.append(tr)

        return {"hamiltonians": hams, "transitions": tuple(transitions)}

    @property
    def dim(self) -> int:
        return int(self.hamiltonians[0].shape[0])

    @property
    def components(self) -> int:
        return len(self.hamiltonians)

    @property
    def channels(self) -> int:
        return 1 + max((tr.channel for tr in self.transitions), default=-1)

    def transition_map(self) -> Dict[Tuple[int, int, int], np.ndarray]:
        """Sparse map ``(k, j, lambda) -> R``."""
        return {tr.key: tr.matrix for tr in self.transitions}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "components": self.components,
            "hamiltonians": [matrix_payload(h) for h in self.hamiltonians],
            "transitions": [
                {
                    "to_k": tr.to_k,
                    "from_j": tr.from_j,
                    "lambda": tr.channel,
                    "matrix": matrix_payload(tr.matrix),
                }
                for tr in self.transitions
            ],
        }


class WaveFunctionVector(ArrayRecord):
    """Stacked composite vectors, one per component"""
    dim: int = Field(..., ge=1)
    components: int = Field(..., ge=1)
    stacked: np.ndarray = Field(..., description="Length K*N^2 vector")

    @model_validator(mode="before")
    @classmethod
    def _check_length(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            vec = np.array(data["stacked"], dtype=np.complex128).ravel()
            if vec.size != data["components"] * data["dim"] ** 2:
                raise BadLength(
                    f"Stacked vector of length {vec.size} does not match "
                    f"K={data['components']}, N={data['dim']}",
                    field="stacked",
                )
            data["stacked"] = frozen(vec)
        return data

    def component(self, k: int) -> np.ndarray:
        n2 = self.dim ** 2
        return self.stacked[k * n2:(k + 1) * n2]

    def matrices(self) -> List[np.ndarray]:
        return [self.component(k).reshape(self.dim, self.dim).copy() for k in range(self.components)]

    def total_trace(self) -> complex:
        return complex(sum(np.trace(m) for m in self.matrices()))


class EffectiveHamiltonianMatrix(ArrayRecord):
    """Block effective Hamiltonian; ``blocks[k][j]`` couples component j into k"""
    dim: int
    components: int
    flattened: np.ndarray

    @property
    def blocks(self) -> List[List[np.ndarray]]:
        n2 = self.dim ** 2
        return [
            [self.flattened[k * n2:(k + 1) * n2, j * n2:(j + 1) * n2] for j in range(self.components)]
            for k in range(self.components)
        ]

    def block(self, k: int, j: int) -> np.ndarray:
        n2 = self.dim ** 2
        return self.flattened[k * n2:(k + 1) * n2, j * n2:(j + 1) * n2]


class GeneralizedDampingBasis(ArrayRecord):
    """Eigen-operator sets of the generalized Liouvillian"""
    eigenvalues: np.ndarray
    right_ops: Tuple[Tuple[np.ndarray, ...], ...]
    left_ops: Tuple[Tuple[np.ndarray, ...], ...]
    system: Optional[Any] = Field(None, description="Underlying EigenSystem of -i H")

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    def members(self) -> List[Tuple[complex, Tuple[np.ndarray, ...], Tuple[np.ndarray, ...]]]:
        """``(lambda, {A_k}, {B_k})`` triples."""
        return list(zip(self.eigenvalues, self.right_ops, self.left_ops))

    def pairing(self) -> np.ndarray:
        """Matrix of ``sum_k Tr(A_k^mu B_k^nu)``."""
        a = np.array(self.right_ops)
        b = np.array(self.left_ops)
        return np.einsum("mkab,nkba->mn", a, b)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "eigenvalues": complex_list(self.eigenvalues),
            "right_ops": [[matrix_payload(a) for a in ops] for ops in self.right_ops],
            "left_ops": [[matrix_payload(b) for b in ops] for ops in self.left_ops],
        }
