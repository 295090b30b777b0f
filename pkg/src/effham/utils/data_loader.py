"""
Data loading utilities for effham

Reads model, state, generator and scan files into domain records and
writes results back as JSON (``[re, im]`` complex entries) or CSV.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from ..exceptions import DimensionMismatch, ModelFileError
from ..models.files import (
    BasisFile,
    GeneralizedModelFile,
    GeneratorFile,
    MatrixFile,
    ModelFile,
    ScanConfigFile,
    payload_to_array,
)
from ..models.common import matrix_payload
from ..models.generalized import GeneralizedLindbladModel, Transition
from ..models.lindblad import LindbladModel
from ..models.scan import ScanConfig
from ..models.trajectories import GeneratorTrajectory

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
SchemaT = TypeVar("SchemaT", bound=BaseModel)


class DataLoader:
    """
    Utility class for reading and writing effham files
    """

    def __init__(self, base_dir: Optional[PathLike] = None):
        """
        Initialize data loader

        Args:
            base_dir: Directory that relative paths are resolved against
        """
        self.base_dir = Path(base_dir) if base_dir else None

    def _resolve(self, path: PathLike) -> Path:
        p = Path(path)
        if self.base_dir is not None and not p.is_absolute():
            return self.base_dir / p
        return p

    def _read_json(self, path: PathLike) -> Any:
        p = self._resolve(path)
        try:
            with open(p, "r", encoding="utf-8") as f:
                return json.load(f)
        except FileNotFoundError:
            raise ModelFileError(f"File not found: {p}", field="path")
        except json.JSONDecodeError as e:
            raise ModelFileError(f"Invalid JSON in {p}: {e}", field="path")

    def _parse(self, schema: Type[SchemaT], payload: Any, path: PathLike) -> SchemaT:
        try:
            return schema.model_validate(payload)
        except ValidationError as e:
            first = e.errors()[0]
            field = ".".join(str(p) for p in first["loc"]) or None
            raise ModelFileError(f"{Path(path).name}: {first['msg']}", field=field)

    def load_model(self, path: PathLike) -> LindbladModel:
        """
        Load a Markovian model file

        Returns:
            LindbladModel with validated operators
        """
        spec = self._parse(ModelFile, self._read_json(path), path)
        model = LindbladModel(
            hamiltonian=payload_to_array(spec.hamiltonian),
            lindblad_ops=tuple(payload_to_array(op) for op in spec.lindblad_ops),
        )
        logger.debug(f"Loaded model with N={model.dim} and {len(model.lindblad_ops)} operators")
        return model

    def load_state(self, path: PathLike, dim: Optional[int] = None) -> np.ndarray:
        """
        Load a density matrix

        Both ``{"matrix": [...]}`` and a bare nested list are accepted.
        """
        payload = self._read_json(path)
        if isinstance(payload, list):
            payload = {"matrix": payload}
        rho = payload_to_array(self._parse(MatrixFile, payload, path).matrix)
        if dim is not None and rho.shape != (dim, dim):
            raise DimensionMismatch(f"State must be {dim}x{dim}, got {rho.shape}", field="matrix")
        return rho

    def load_generalized_model(self, path: PathLike) -> GeneralizedLindbladModel:
        spec = self._parse(GeneralizedModelFile, self._read_json(path), path)
        return GeneralizedLindbladModel(
            hamiltonians=tuple(payload_to_array(h) for h in spec.hamiltonians),
            transitions=tuple(
                Transition(
                    to_k=tr.to_k,
                    from_j=tr.from_j,
                    channel=tr.channel,
                    matrix=payload_to_array(tr.matrix),
                )
                for tr in spec.transitions
            ),
        )

    def load_generator(self, path: PathLike) -> GeneratorTrajectory:
        spec = self._parse(GeneratorFile, self._read_json(path), path)
        mids = None
        if spec.midpoints is not None:
            mids = np.array([payload_to_array(m) for m in spec.midpoints])
        return GeneratorTrajectory(
            times=np.array(spec.times),
            matrices=np.array([payload_to_array(m) for m in spec.matrices]),
            midpoints=mids,
        )

    def load_basis(self, path: PathLike) -> List[np.ndarray]:
        """Load candidate basis vectors, each given as an N x N matrix"""
        spec = self._parse(BasisFile, self._read_json(path), path)
        return [payload_to_array(m).reshape(-1) for m in spec.basis]

    def load_scan_config(self, path: PathLike) -> ScanConfig:
        spec = self._parse(ScanConfigFile, self._read_json(path), path)
        initial = None
        if spec.initial != "A03":
            initial = np.array([payload_to_array(m) for m in spec.initial])
        return ScanConfig(
            gamma1_axis=tuple(spec.axis("gamma1_T")),
            dgamma1_axis=tuple(spec.axis("dgamma1_T")),
            gamma2_T=spec.gamma2_T,
            dgamma2_T=spec.dgamma2_T,
            T=spec.T,
            steps=spec.steps,
            floor=spec.floor,
            initial=initial,
        )

    @staticmethod
    def dumps(payload: Dict[str, Any]) -> str:
        """Serialize with shortest round-trip float representations"""
        return json.dumps(payload, indent=2) + "\n"

    def write_json(self, payload: Dict[str, Any], path: Optional[PathLike] = None) -> str:
        """Write ``payload`` to ``path`` (if given) and return the text"""
        text = self.dumps(payload)
        if path is not None:
            self.write_text(path, text)
        return text

    def save_model(self, model: LindbladModel, path: PathLike) -> None:
        self.write_json(model.to_dict(), path)

    def save_generalized_model(self, model: GeneralizedLindbladModel, path: PathLike) -> None:
        self.write_json(model.to_dict(), path)

    def save_generator(self, gen: GeneratorTrajectory, path: PathLike) -> None:
        self.write_json(gen.to_dict(), path)

    def save_state(self, rho: np.ndarray, path: PathLike) -> None:
        self.write_json({"matrix": matrix_payload(rho)}, path)

    @staticmethod
    def frame_to_csv(frame: pd.DataFrame) -> str:
        """Full-precision, locale-independent CSV text"""
        return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")

    def write_csv(self, frame: pd.DataFrame, path: Optional[PathLike] = None) -> str:
        text = self.frame_to_csv(frame)
        if path is not None:
            self.write_text(path, text)
        return text

    def write_text(self, path: PathLike, text: str) -> None:
        p = self._resolve(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        with open(p, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        logger.debug(f"Wrote {p}")
