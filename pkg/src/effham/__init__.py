"""
effham - Effective-Hamiltonian solver for open quantum systems

Markovian and generalized (non-Markovian, time-local) Lindblad master
equations recast as Schrodinger-like equations on a doubled space, with
damping bases, decoherence-free subspace checks, geometric phases and an
adiabaticity scan for a two-band environment model.
"""

__version__ = "0.1.0"
__author__ = "effham developers"

from .exceptions import EffHamError
from .models import *  # noqa: F401,F403
from .utils.data_loader import DataLoader

__all__ = [
    "EffHamError",
    "DataLoader",
    # Re-export models
    "LindbladModel",
    "CompositeState",
    "EffectiveHamiltonian",
    "DampingBasis",
    "SteadyState",
    "DDFSReport",
    "GeneralizedLindbladModel",
    "Transition",
    "WaveFunctionVector",
    "EffectiveHamiltonianMatrix",
    "GeneralizedDampingBasis",
    "GeneratorTrajectory",
    "EigenTrack",
    "InvariantTrajectory",
    "PhaseResult",
    "AdiabaticTrajectory",
    "TwoBandParams",
    "RampSpec",
    "ScanConfig",
    "ScanGrid",
]
