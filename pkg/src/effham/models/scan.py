"""
Adiabaticity scan configuration and result grid.
"""
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import Field, model_validator

from ..exceptions import DimensionMismatch, EmptyGrid
from ..utils.numerics import frozen
from .common import ArrayRecord

SCAN_COLUMNS = ["gamma1_T", "dgamma1_T", "Gamma", "one_minus_F"]


class ScanConfig(ArrayRecord):
    """Axes and ramp parameters of a (gamma1(T), d gamma1(T)) scan"""
    gamma1_axis: Tuple[float, ...]
    dgamma1_axis: Tuple[float, ...]
    gamma2_T: float = Field(1.0, gt=0)
    dgamma2_T: float = 1.0
    T: float = Field(1.0, gt=0)
    steps: int = Field(200, ge=100)
    floor: float = Field(1e-3, gt=0)
    initial: Optional[np.ndarray] = Field(
        None, description="Explicit (K, N, N) components; None selects A03 at gamma(0)"
    )

    @model_validator(mode="after")
    def _nonempty(self) -> "ScanConfig":
        if not self.gamma1_axis or not self.dgamma1_axis:
            raise EmptyGrid("Scan axes must be nonempty", field="axes")
        if self.initial is not None and self.initial.shape != (2, 2, 2):
            raise DimensionMismatch("initial must hold two 2x2 components", field="initial")
        return self

    @property
    def initial_tag(self) -> str:
        return "A03" if self.initial is None else "explicit"

    @property
    def shape(self) -> Tuple[int, int]:
        return (len(self.gamma1_axis), len(self.dgamma1_axis))

    def cells(self) -> List[Tuple[int, int]]:
        """Cell indices in output order (gamma1 outer, d gamma1 inner)."""
        n1, n2 = self.shape
        return [(i, j) for i in range(n1) for j in range(n2)]

    def params(self) -> Dict[str, Any]:
        return {
            "gamma2_T": self.gamma2_T,
            "dgamma2_T": self.dgamma2_T,
            "T": self.T,
            "steps": self.steps,
            "floor": self.floor,
            "initial": self.initial_tag,
        }


class ScanGrid(ArrayRecord):
    """Gamma and 1 - F over the scan grid; failed cells hold NaN"""
    gamma1_T: np.ndarray
    dgamma1_T: np.ndarray
    gamma_cap: np.ndarray = Field(..., description="Shape (len(gamma1_T), len(dgamma1_T))")
    infidelity: np.ndarray = Field(..., description="Same shape as gamma_cap")
    params: Dict[str, Any] = Field(default_factory=dict)
    errors: List[Dict[str, Any]] = Field(default_factory=list)

    @model_validator(mode="before")
    @classmethod
    def _freeze(cls, data: Any) -> Any:
        if isinstance(data, dict):
            data = dict(data)
            for key in ("gamma1_T", "dgamma1_T", "gamma_cap", "infidelity"):
                data[key] = frozen(np.asarray(data[key], dtype=float))
            shape = (data["gamma1_T"].size, data["dgamma1_T"].size)
            if data["gamma_cap"].shape != shape or data["infidelity"].shape != shape:
                raise DimensionMismatch(f"Grid values must have shape {shape}", field="grid")
        return data

    @property
    def shape(self) -> Tuple[int, int]:
        return (int(self.gamma1_T.size), int(self.dgamma1_T.size))

    def values(self, which: str) -> np.ndarray:
        """Return ``gamma_cap`` for ``Gamma`` and ``infidelity`` for ``OneMinusF``."""
        if which == "Gamma":
            return self.gamma_cap
        if which == "OneMinusF":
            return self.infidelity
        raise ValueError(f"Unknown grid quantity: {which}")

    def to_frame(self) -> pd.DataFrame:
        """One row per cell, gamma1 outer and d gamma1 inner."""
        g1, dg1 = np.meshgrid(self.gamma1_T, self.dgamma1_T, indexing="ij")
        return pd.DataFrame(
            {
                "gamma1_T": g1.ravel(),
                "dgamma1_T": dg1.ravel(),
                "Gamma": self.gamma_cap.ravel(),
                "one_minus_F": self.infidelity.ravel(),
            },
            columns=SCAN_COLUMNS,
        )
