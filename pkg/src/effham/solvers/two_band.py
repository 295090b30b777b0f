"""
Dissipative qubit coupled to a two-band environment.

Components 0 and 1 are the lower and upper band. Basis order is
``(|e>, |g>)``; ``R_01 = sqrt(gamma1) sigma+`` moves weight from the upper
into the lower band and ``R_10 = sqrt(gamma2) sigma-`` the reverse.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ..models.generalized import GeneralizedLindbladModel, Transition, WaveFunctionVector
from ..models.trajectories import GeneratorTrajectory
from ..models.two_band import RampSpec, TwoBandParams
from ..utils.numerics import CMatrix, kron
from .generalized import build_block_hamiltonian, stack

logger = logging.getLogger(__name__)

SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SIGMA_MINUS = SIGMA_PLUS.T.copy()
EXCITED = np.array([[1, 0], [0, 0]], dtype=np.complex128)
GROUND = np.array([[0, 0], [0, 1]], dtype=np.complex128)
RAISE = SIGMA_PLUS  # |e><g|
LOWER = SIGMA_MINUS  # |g><e|
ZERO = np.zeros((2, 2), dtype=np.complex128)

Pair = Tuple[CMatrix, CMatrix]


def build_model(p: TwoBandParams) -> GeneralizedLindbladModel:
    """Two components with vanishing Hamiltonians and the two transfer operators."""
    return GeneralizedLindbladModel(
        hamiltonians=(ZERO, ZERO),
        transitions=(
            Transition(to_k=0, from_j=1, channel=0, matrix=np.sqrt(p.gamma1) * SIGMA_PLUS),
            Transition(to_k=1, from_j=0, channel=0, matrix=np.sqrt(p.gamma2) * SIGMA_MINUS),
        ),
    )


def closed_form_solution(p: TwoBandParams, rhos0: Sequence[npt.ArrayLike], t: float) -> Pair:
    """Exact components at time ``t``."""
    r1 = np.asarray(rhos0[0], dtype=np.complex128)
    r2 = np.asarray(rhos0[1], dtype=np.complex128)
    g1, g2, s = p.gamma1, p.gamma2, p.total
    decay = np.exp(-s * t)

    out1 = np.zeros((2, 2), dtype=np.complex128)
    out2 = np.zeros((2, 2), dtype=np.complex128)
    out1[0, 0] = ((g1 + g2 * decay) * r1[0, 0] + g1 * (1 - decay) * r2[1, 1]) / s
    out1[1, 1] = r1[1, 1]
    out1[0, 1] = r1[0, 1] * np.exp(-g2 * t / 2)
    out1[1, 0] = r1[1, 0] * np.exp(-g2 * t / 2)

    out2[1, 1] = ((g2 + g1 * decay) * r2[1, 1] + g2 * (1 - decay) * r1[0, 0]) / s
    out2[0, 0] = r2[0, 0]
    out2[0, 1] = r2[0, 1] * np.exp(-g1 * t / 2)
    out2[1, 0] = r2[1, 0] * np.exp(-g1 * t / 2)
    return out1, out2


def closed_form_propagator(p: TwoBandParams, t: float) -> CMatrix:
    """
    8 x 8 evolution operator in the stacked basis.

    Blocks follow the pair basis ``|ee>, |eg>, |ge>, |gg>`` of each
    component; ``kron(sigma+, sigma+)`` is the single entry ``|ee><gg|``.
    """
    g1, g2, s = p.gamma1, p.gamma2, p.total
    decay = np.exp(-s * t)
    ee = kron(EXCITED, EXCITED)
    gg = kron(GROUND, GROUND)
    coh = kron(EXCITED, GROUND) + kron(GROUND, EXCITED)

    u11 = (g1 + g2 * decay) / s * ee + np.exp(-g2 * t / 2) * coh + gg
    u12 = g1 * (1 - decay) / s * kron(SIGMA_PLUS, SIGMA_PLUS)
    u21 = g2 * (1 - decay) / s * kron(SIGMA_MINUS, SIGMA_MINUS)
    u22 = ee + np.exp(-g1 * t / 2) * coh + (g2 + g1 * decay) / s * gg
    return np.block([[u11, u12], [u21, u22]])


def steady_state_set(p: TwoBandParams) -> List[Pair]:
    """The three stationary component pairs A01, A02, A03."""
    s = p.total
    return [
        (ZERO.copy(), EXCITED.copy()),
        (GROUND.copy(), ZERO.copy()),
        (p.gamma1 / s * EXCITED, p.gamma2 / s * GROUND),
    ]


@dataclass(frozen=True)
class EigenOperatorTable:
    """Hand-derived eigensystem of the two-band generator (decay rates of -i H)."""

    labels: Tuple[str, ...]
    eigenvalues: Tuple[float, ...]
    right: Tuple[Pair, ...]
    left: Tuple[Pair, ...]

    def stacked_right(self) -> np.ndarray:
        """Right eigenvectors as columns of an 8 x 8 matrix."""
        return np.column_stack([stack(pair).stacked for pair in self.right])

    def stacked_left(self) -> np.ndarray:
        """Left eigenvectors as rows; transposes undo the dual-operator convention."""
        return np.vstack([stack([b.T for b in pair]).stacked for pair in self.left])

    def pairing(self) -> np.ndarray:
        """``sum_k Tr(A_k^mu B_k^nu)`` for every pair."""
        a = np.array(self.right)
        b = np.array(self.left)
        return np.einsum("mkab,nkba->mn", a, b)


def eigen_operator_table(p: TwoBandParams) -> EigenOperatorTable:
    """Right/left eigen-operator tables for rates ``p``."""
    g1, g2, s = p.gamma1, p.gamma2, p.total
    a01, a02, a03 = steady_state_set(p)
    right = (
        a01,
        a02,
        a03,
        (ZERO, LOWER),
        (ZERO, RAISE),
        (LOWER, ZERO),
        (RAISE, ZERO),
        (EXCITED, -GROUND),
    )
    left = (
        (ZERO, EXCITED),
        (GROUND, ZERO),
        (EXCITED, GROUND),
        (ZERO, RAISE),
        (ZERO, LOWER),
        (RAISE, ZERO),
        (LOWER, ZERO),
        (g2 / s * EXCITED, -g1 / s * GROUND),
    )
    return EigenOperatorTable(
        labels=("01", "02", "03", "11", "12", "21", "22", "3"),
        eigenvalues=(0.0, 0.0, 0.0, -g1 / 2, -g1 / 2, -g2 / 2, -g2 / 2, -s),
        right=tuple((np.array(a), np.array(b)) for a, b in right),
        left=tuple((np.array(a), np.array(b)) for a, b in left),
    )


def ramp(spec: RampSpec, t: float) -> float:
    """``max(floor, gamma(T) + slope (t - T))``."""
    return spec(t)


def ramped_model(spec1: RampSpec, spec2: RampSpec, t: float) -> GeneralizedLindbladModel:
    return build_model(TwoBandParams(gamma1=ramp(spec1, t), gamma2=ramp(spec2, t)))


def _unit_rate_generators() -> Tuple[CMatrix, CMatrix]:
    """Block generators of the gamma1 and gamma2 transfer terms at unit rate."""
    up = GeneralizedLindbladModel(
        hamiltonians=(ZERO, ZERO), transitions=(Transition(to_k=0, from_j=1, channel=0, matrix=SIGMA_PLUS),)
    )
    down = GeneralizedLindbladModel(
        hamiltonians=(ZERO, ZERO), transitions=(Transition(to_k=1, from_j=0, channel=0, matrix=SIGMA_MINUS),)
    )
    return build_block_hamiltonian(up).flattened, build_block_hamiltonian(down).flattened


def ramped_generator(spec1: RampSpec, spec2: RampSpec, steps: int) -> GeneratorTrajectory:
    """
    Block generator of the ramped model on ``steps`` uniform intervals of
    ``[0, T]``, with exact midpoint samples.
    """
    times = np.linspace(0.0, spec1.T, steps + 1)
    mids = 0.5 * (times[:-1] + times[1:])
    # Vanishing Hamiltonians make the generator gamma1 * up + gamma2 * down
    per_gamma1, per_gamma2 = _unit_rate_generators()

    def sample(grid: np.ndarray) -> np.ndarray:
        g1 = np.array([ramp(spec1, t) for t in grid])
        g2 = np.array([ramp(spec2, t) for t in grid])
        return g1[:, None, None] * per_gamma1 + g2[:, None, None] * per_gamma2

    return GeneratorTrajectory(times=times, matrices=sample(times), midpoints=sample(mids))


def stationary_state(p: TwoBandParams) -> WaveFunctionVector:
    """A03 as a wave-function vector; the unit-trace stationary state."""
    return stack(steady_state_set(p)[2])
