"""
Parameters of the two-band dissipative qubit.
"""
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..exceptions import ModelInvariantError


class TwoBandParams(BaseModel):
    """Transfer rates between the lower (1) and upper (2) environment bands"""
    model_config = ConfigDict(frozen=True)

    gamma1: float = Field(..., description="Up-transfer rate, component 2 -> 1 via sigma+")
    gamma2: float = Field(..., description="Down-transfer rate, component 1 -> 2 via sigma-")

    @model_validator(mode="after")
    def _positive(self) -> "TwoBandParams":
        for name in ("gamma1", "gamma2"):
            value = getattr(self, name)
            if not value > 0:
                raise ModelInvariantError(f"{name} must be > 0, got {value}", field=name)
        return self

    @property
    def total(self) -> float:
        return self.gamma1 + self.gamma2


class RampSpec(BaseModel):
    """Linear rate ramp fixed by its value and slope at the final time, clamped below"""
    model_config = ConfigDict(frozen=True)

    value_at_T: float = Field(..., description="gamma(T)")
    slope_at_T: float = Field(..., description="d gamma / dt at T")
    T: float = Field(..., gt=0, description="Final time")
    floor: float = Field(1e-3, gt=0, description="Lower clamp of gamma(t)")

    def __call__(self, t: float) -> float:
        return max(self.floor, self.value_at_T + self.slope_at_T * (t - self.T))

    def derivative(self, t: float) -> float:
        """Slope at ``t``; zero on clamped segments."""
        if self.value_at_T + self.slope_at_T * (t - self.T) <= self.floor:
            return 0.0
        return self.slope_at_T
