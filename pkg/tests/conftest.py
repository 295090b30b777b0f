"""
Pytest configuration and shared fixtures for effham tests.

Provides:
- Seeded random generators and random models/states
- Pauli matrices
- Adiabatically precessing spin-1/2 generators
- Small two-band parameter sets
"""

import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pytest

# Add src directory to path so we can import effham
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from effham.config import SolverConfig, StrictConfig, load_config, use_settings  # noqa: E402
from effham.models import (  # noqa: E402
    GeneralizedLindbladModel,
    GeneratorTrajectory,
    LindbladModel,
    Transition,
    TwoBandParams,
)
from effham.solvers.geometric_phase import effective_generator_trajectory  # noqa: E402


# ============================================================================
# Random objects
# ============================================================================


def random_complex(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = random_complex(rng, (n, n))
    return (a + a.conj().T) / 2


def random_state(rng: np.random.Generator, n: int, weight: float = 1.0) -> np.ndarray:
    """Full-rank density matrix scaled to trace ``weight``."""
    a = random_complex(rng, (n, n))
    rho = a @ a.conj().T + 0.05 * np.eye(n)
    return weight * rho / np.trace(rho).real


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(20240611)


@pytest.fixture
def make_model(rng: np.random.Generator) -> Callable[..., LindbladModel]:
    def factory(n: int = 2, n_ops: int = 2, scale: float = 0.5) -> LindbladModel:
        return LindbladModel(
            hamiltonian=random_hermitian(rng, n),
            lindblad_ops=tuple(scale * random_complex(rng, (n, n)) for _ in range(n_ops)),
        )

    return factory


@pytest.fixture
def make_state(rng: np.random.Generator) -> Callable[..., np.ndarray]:
    def factory(n: int = 2, weight: float = 1.0) -> np.ndarray:
        return random_state(rng, n, weight)

    return factory


@pytest.fixture
def make_generalized_model(rng: np.random.Generator) -> Callable[..., GeneralizedLindbladModel]:
    def factory(n: int = 2, components: int = 2, channels: int = 1, scale: float = 0.5) -> GeneralizedLindbladModel:
        transitions = [
            Transition(to_k=k, from_j=j, channel=lam, matrix=scale * random_complex(rng, (n, n)))
            for k in range(components)
            for j in range(components)
            for lam in range(channels)
        ]
        return GeneralizedLindbladModel(
            hamiltonians=tuple(random_hermitian(rng, n) for _ in range(components)),
            transitions=tuple(transitions),
        )

    return factory


# ============================================================================
# Spin-1/2 fixtures
# ============================================================================


@pytest.fixture
def pauli() -> Dict[str, np.ndarray]:
    return {
        "i": np.eye(2, dtype=np.complex128),
        "x": np.array([[0, 1], [1, 0]], dtype=np.complex128),
        "y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
        "z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    }


def spin_hamiltonian(theta: float, omega: float, omega0: float = 1.0) -> Callable[[float], np.ndarray]:
    """``(omega0/2) n(t).sigma`` with n precessing about z at polar angle theta."""
    sx = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    sy = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    sz = np.array([[1, 0], [0, -1]], dtype=np.complex128)

    def h(t: float) -> np.ndarray:
        n = (np.sin(theta) * np.cos(omega * t), np.sin(theta) * np.sin(omega * t), np.cos(theta))
        return 0.5 * omega0 * (n[0] * sx + n[1] * sy + n[2] * sz)

    return h


@pytest.fixture
def precessing_spin() -> Callable[..., Tuple[GeneratorTrajectory, GeneratorTrajectory]]:
    """
    Closed spin-1/2 in a field rotating once about z.

    Returns the effective-Hamiltonian trajectory over ``fraction`` of a
    period and the commuting resolver ``H(t) kron I``.
    """

    def factory(
        theta: float, omega: float = 1e-3, steps: int = 2000, fraction: float = 1.0
    ) -> Tuple[GeneratorTrajectory, GeneratorTrajectory]:
        h = spin_hamiltonian(theta, omega)
        times = np.linspace(0.0, fraction * 2 * np.pi / omega, steps + 1)
        gen = effective_generator_trajectory(times, h)
        resolver = GeneratorTrajectory(
            times=times, matrices=np.array([np.kron(h(t), np.eye(2)) for t in times])
        )
        return gen, resolver

    return factory


# ============================================================================
# Settings
# ============================================================================


@pytest.fixture
def strict_settings():
    """Activate the tighter oracle tolerances for one test."""
    with use_settings(load_config(config_class=StrictConfig)) as settings:
        yield settings


@pytest.fixture
def default_settings():
    with use_settings(load_config(config_class=SolverConfig)) as settings:
        yield settings


@pytest.fixture
def two_band_params() -> List[TwoBandParams]:
    return [
        TwoBandParams(gamma1=1.0, gamma2=1.0),
        TwoBandParams(gamma1=0.3, gamma2=1.7),
        TwoBandParams(gamma1=2.0, gamma2=0.5),
    ]


def wrapped(angle: float) -> float:
    """Angle mapped to (-pi, pi]."""
    return float(np.angle(np.exp(1j * angle)))


def angle_distance(a: float, b: float) -> float:
    return abs(wrapped(a - b))


def closest_track(tracks, vector: np.ndarray) -> Optional[int]:
    """Index of the track whose initial right vector best matches ``vector``."""
    scores = [abs(np.vdot(vector, tr.rights[0])) / np.linalg.norm(tr.rights[0]) for tr in tracks]
    return int(np.argmax(scores))
