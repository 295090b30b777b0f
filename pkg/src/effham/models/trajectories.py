"""
Time-sampled generators, eigen-tracks, invariant trajectories and phase
results.
"""
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import Field, model_validator

from ..exceptions import DimensionMismatch, PreconditionError
from ..utils.numerics import frozen
from .common import ArrayRecord, matrix_payload


class GeneratorTrajectory(ArrayRecord):
    """
    Generator matrices sampled on a time grid.

    ``midpoints`` (optional) holds the generator at the centres of the grid
    intervals; when absent, steppers use the mean of the two neighbours.
    """
    times: np.ndarray
    matrices: np.ndarray = Field(..., description="Shape (M+1, n, n)")
    midpoints: Optional[np.ndarray] = Field(None, description="Shape (M, n, n)")

    @model_validator(mode="before")
    @classmethod
    def _check_grid(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        times = np.array(data["times"], dtype=float).ravel()
        mats = np.array(data["matrices"], dtype=np.complex128)
        if times.size < 2:
            raise PreconditionError("A trajectory needs at least two times", field="times")
        if np.any(np.diff(times) <= 0):
            raise PreconditionError("times must be strictly increasing", field="times")
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2] or mats.shape[0] != times.size:
            raise DimensionMismatch(
                f"matrices must have shape ({times.size}, n, n), got {mats.shape}",
                field="matrices",
            )
        if not np.all(np.isfinite(mats)):
            raise PreconditionError("matrices have non-finite entries", field="matrices")
        mids = data.get("midpoints")
        if mids is not None:
            mids = np.array(mids, dtype=np.complex128)
            if mids.shape != (times.size - 1,) + mats.shape[1:]:
                raise DimensionMismatch("midpoints must have one matrix per interval", field="midpoints")
            mids = frozen(mids)
        return {"times": frozen(times), "matrices": frozen(mats), "midpoints": mids}

    @property
    def dim(self) -> int:
        return int(self.matrices.shape[1])

    @property
    def steps(self) -> int:
        return int(self.times.size - 1)

    @property
    def uniform_step(self) -> float:
        """Grid spacing; NaN when the grid is not uniform."""
        h = np.diff(self.times)
        if np.allclose(h, h[0], rtol=1e-9, atol=0.0):
            return float(h[0])
        return float("nan")

    def midpoint(self, i: int) -> np.ndarray:
        """Generator at the centre of interval ``i``."""
        if self.midpoints is not None:
            return self.midpoints[i]
        return 0.5 * (self.matrices[i] + self.matrices[i + 1])

    def derivative(self, i: int) -> np.ndarray:
        """Finite-difference time derivative at grid point ``i``."""
        t, m = self.times, self.matrices
        last = self.steps
        if 0 < i < last:
            return (m[i + 1] - m[i - 1]) / (t[i + 1] - t[i - 1])
        if last < 2:
            return (m[1] - m[0]) / (t[1] - t[0])
        # Written in differences so that constant samples give exactly zero
        if i == 0:
            h = t[1] - t[0]
            return (3 * (m[1] - m[0]) - (m[2] - m[1])) / (2 * h)
        h = t[last] - t[last - 1]
        return (3 * (m[last] - m[last - 1]) - (m[last - 1] - m[last - 2])) / (2 * h)

    def to_dict(self) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "times": self.times.tolist(),
            "matrices": [matrix_payload(m) for m in self.matrices],
        }
        if self.midpoints is not None:
            payload["midpoints"] = [matrix_payload(m) for m in self.midpoints]
        return payload


class EigenTrack(ArrayRecord):
    """One eigenvalue branch with its right/left vectors along a grid"""
    eigenvalues: np.ndarray = Field(..., description="Shape (M+1,)")
    rights: np.ndarray = Field(..., description="Shape (M+1, n)")
    lefts: np.ndarray = Field(..., description="Shape (M+1, n)")
    degenerate: np.ndarray = Field(..., description="Per-time flag: branch inside a cluster")

    @property
    def is_degenerate(self) -> bool:
        return bool(np.any(self.degenerate))


class InvariantTrajectory(ArrayRecord):
    """Propagated dynamical invariant and its eigen-tracks"""
    generator: GeneratorTrajectory
    invariants: np.ndarray = Field(..., description="Shape (M+1, n, n)")
    tracks: Tuple[EigenTrack, ...]
    defect: float = Field(..., description="Max interior residual of i dI/dt - [H, I]")

    @property
    def times(self) -> np.ndarray:
        return self.generator.times


class PhaseResult(ArrayRecord):
    """Geometric and dynamical phase of one track"""
    track_index: int
    geometric: complex
    dynamical: complex
    noncyclic_correction: float = 0.0

    @property
    def geometric_real(self) -> float:
        return float(self.geometric.real)

    @property
    def total(self) -> float:
        """Real geometric phase including the noncyclic correction."""
        return float(self.geometric.real + self.noncyclic_correction)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "track": self.track_index,
            "geometric": float(self.geometric.real),
            "geometric_im": float(self.geometric.imag),
            "dynamical_re": float(self.dynamical.real),
            "dynamical_im": float(self.dynamical.imag),
            "noncyclic": float(self.noncyclic_correction),
        }


class AdiabaticTrajectory(ArrayRecord):
    """States of an adiabatic (no inter-cluster transition) evolution"""
    times: np.ndarray
    states: Tuple[Any, ...] = Field(..., description="WaveFunctionVector per grid time")
    trace_drift: float = Field(..., description="Max |total trace(t) - total trace(0)|")

    def __len__(self) -> int:
        return len(self.states)

    @property
    def final(self) -> Any:
        return self.states[-1]
