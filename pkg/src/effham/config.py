"""
Configuration for effham.

Provides configuration classes for the numerical tolerances:
- SolverConfig: defaults used by the library and the CLI
- StrictConfig: tighter tolerances used by oracle comparisons

``load_config`` turns a class (plus an optional JSON overrides file) into a
frozen ``Settings`` model; ``get_settings``/``use_settings`` hold the active
instance that library functions fall back to.
"""

import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, Type, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .exceptions import ModelFileError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path("config") / "effham.json"


class SolverConfig:
    """Base configuration class with defaults."""

    # Eigen-decomposition
    TOL_EIG = 1e-9  # residual, relative to the operator norm
    TOL_CLUSTER = 1e-8  # eigenvalue grouping, relative to the operator norm
    TOL_RANK = 1e-6  # smallest singular value of a cluster's eigenvectors

    # States
    TOL_HERMITIAN = 1e-10
    TOL_STATE_TRACE = 1e-8
    FIDELITY_CLAMP = 1e-10

    NULL_SPACE_TOL = 1e-9
    MAX_DIM = 64

    # Time stepping
    MAX_STEP_NORM = 0.1  # max ||H|| * h for the invariant integrator
    STEPS = 2000
    RAMP_FLOOR = 1e-3

    # Phases
    ZERO_OVERLAP = 1e-12
    CYCLIC_TOL = 1e-6


class StrictConfig(SolverConfig):
    """Tighter tolerances for oracle comparisons."""

    TOL_EIG = 1e-11
    TOL_STATE_TRACE = 1e-10


class Settings(BaseModel):
    """Frozen numerical settings passed through the CLI context."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    tol_eig: float = Field(SolverConfig.TOL_EIG, gt=0)
    tol_cluster: float = Field(SolverConfig.TOL_CLUSTER, gt=0)
    tol_rank: float = Field(SolverConfig.TOL_RANK, gt=0)
    tol_hermitian: float = Field(SolverConfig.TOL_HERMITIAN, gt=0)
    tol_state_trace: float = Field(SolverConfig.TOL_STATE_TRACE, gt=0)
    fidelity_clamp: float = Field(SolverConfig.FIDELITY_CLAMP, ge=0)
    null_space_tol: float = Field(SolverConfig.NULL_SPACE_TOL, gt=0)
    max_dim: int = Field(SolverConfig.MAX_DIM, ge=1)
    max_step_norm: float = Field(SolverConfig.MAX_STEP_NORM, gt=0)
    steps: int = Field(SolverConfig.STEPS, ge=1)
    ramp_floor: float = Field(SolverConfig.RAMP_FLOOR, gt=0)
    zero_overlap: float = Field(SolverConfig.ZERO_OVERLAP, gt=0)
    cyclic_tol: float = Field(SolverConfig.CYCLIC_TOL, gt=0)

    @classmethod
    def from_config(cls, config_class: Type[SolverConfig]) -> "Settings":
        """Build settings from a configuration class."""
        values = {
            name.lower(): getattr(config_class, name)
            for name in dir(config_class)
            if name.isupper()
        }
        return cls(**values)


_active_settings: Settings = Settings.from_config(SolverConfig)


def load_config(
    path: Optional[Union[str, Path]] = None,
    config_class: Type[SolverConfig] = SolverConfig,
) -> Settings:
    """
    Load settings from a configuration class and optional JSON overrides.

    Args:
        path: JSON file with lower-case setting names; when None the
            default ``config/effham.json`` is used if it exists
        config_class: Base configuration class

    Returns:
        Frozen Settings instance

    Raises:
        ModelFileError: If the overrides file is malformed
    """
    base: Dict[str, Any] = Settings.from_config(config_class).model_dump()

    config_path = Path(path) if path else DEFAULT_CONFIG_PATH
    if path is None and not config_path.exists():
        return Settings(**base)

    try:
        with open(config_path, "r", encoding="utf-8") as f:
            overrides = json.load(f)
    except FileNotFoundError:
        raise ModelFileError(f"Config file not found: {config_path}", field="config")
    except json.JSONDecodeError as e:
        raise ModelFileError(f"Invalid JSON in {config_path}: {e}", field="config")

    if not isinstance(overrides, dict):
        raise ModelFileError("Config file must hold a JSON object", field="config")

    base.update(overrides)
    try:
        settings = Settings(**base)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(p) for p in first["loc"])
        raise ModelFileError(f"Invalid config value: {first['msg']}", field=field)

    logger.debug(f"Loaded settings from {config_path}")
    return settings


def get_settings() -> Settings:
    """Return the active settings."""
    return _active_settings


def set_settings(settings: Settings) -> None:
    """Replace the active settings."""
    global _active_settings
    _active_settings = settings


@contextmanager
def use_settings(settings: Settings) -> Iterator[Settings]:
    """Temporarily activate ``settings``."""
    previous = get_settings()
    set_settings(settings)
    try:
        yield settings
    finally:
        set_settings(previous)
