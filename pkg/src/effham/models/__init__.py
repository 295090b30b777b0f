"""
effham models package
"""
from .files import (
    BasisFile,
    AxisSpec,
    GeneralizedModelFile,
    GeneratorFile,
    MatrixFile,
    ModelFile,
    ScanConfigFile,
    TransitionFile,
)
from .generalized import (
    EffectiveHamiltonianMatrix,
    GeneralizedDampingBasis,
    GeneralizedLindbladModel,
    Transition,
    WaveFunctionVector,
)
from .lindblad import (
    CompositeState,
    DampingBasis,
    DDFSReport,
    EffectiveHamiltonian,
    LindbladModel,
    SteadyState,
)
from .scan import ScanConfig, ScanGrid
from .trajectories import (
    AdiabaticTrajectory,
    EigenTrack,
    GeneratorTrajectory,
    InvariantTrajectory,
    PhaseResult,
)
from .two_band import RampSpec, TwoBandParams

__all__ = [
    # Markovian models
    "LindbladModel",
    "CompositeState",
    "EffectiveHamiltonian",
    "DampingBasis",
    "SteadyState",
    "DDFSReport",

    # Generalized models
    "GeneralizedLindbladModel",
    "Transition",
    "WaveFunctionVector",
    "EffectiveHamiltonianMatrix",
    "GeneralizedDampingBasis",

    # Trajectories and phases
    "GeneratorTrajectory",
    "EigenTrack",
    "InvariantTrajectory",
    "PhaseResult",
    "AdiabaticTrajectory",

    # Two-band model and scans
    "TwoBandParams",
    "RampSpec",
    "ScanConfig",
    "ScanGrid",

    # File schemas
    "ModelFile",
    "BasisFile",
    "MatrixFile",
    "GeneralizedModelFile",
    "TransitionFile",
    "GeneratorFile",
    "AxisSpec",
    "ScanConfigFile",
]
