"""
Generalized Lindblad equations through a block effective Hamiltonian.

Component k of the wave-function vector holds ``vec(rho_k)``. Block
``(k, j)`` of the generator is

    delta_kj (Heff_k kron I - I kron conj(Heff_k)) + i sum_l R_kj^l kron conj(R_kj^l),
    Heff_k = H_k - (i/2) sum_{j, l} R_jk^l^dag R_jk^l,

where ``R_kj^l`` moves weight from component j into component k.
"""

import logging
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg

from ..config import get_settings
from ..exceptions import DimensionMismatch, PreconditionError
from ..models.generalized import (
    EffectiveHamiltonianMatrix,
    GeneralizedDampingBasis,
    GeneralizedLindbladModel,
    WaveFunctionVector,
)
from ..models.lindblad import DDFSReport
from ..models.trajectories import GeneratorTrajectory
from ..utils.numerics import CMatrix, eig_full, expm, frozen, kron, require_square
from .lindblad import (
    VectorLike,
    normalized_basis,
    check_hermitian_symmetry,
    ancilla_conjugate,
    span_projector,
)

logger = logging.getLogger(__name__)


def sink_hamiltonian(model: GeneralizedLindbladModel, k: int) -> CMatrix:
    """``H_k - (i/2) sum`` over transitions leaving component k."""
    heff = model.hamiltonians[k].astype(np.complex128)
    for tr in model.transitions:
        if tr.from_j == k:
            heff = heff - 0.5j * (tr.matrix.conj().T @ tr.matrix)
    return heff


def build_block_hamiltonian(model: GeneralizedLindbladModel) -> EffectiveHamiltonianMatrix:
    """Assemble the (K N^2) x (K N^2) block generator."""
    n, n_comp = model.dim, model.components
    n2 = n * n
    eye = np.eye(n)
    flat = np.zeros((n_comp * n2, n_comp * n2), dtype=np.complex128)
    for k in range(n_comp):
        heff = sink_hamiltonian(model, k)
        flat[k * n2:(k + 1) * n2, k * n2:(k + 1) * n2] = kron(heff, eye) - kron(eye, ancilla_conjugate(heff))
    for tr in model.transitions:
        k, j = tr.to_k, tr.from_j
        flat[k * n2:(k + 1) * n2, j * n2:(j + 1) * n2] += 1j * kron(tr.matrix, ancilla_conjugate(tr.matrix))
    flat.setflags(write=False)
    return EffectiveHamiltonianMatrix(dim=n, components=n_comp, flattened=flat)


def _check_components(model: GeneralizedLindbladModel, rhos: Sequence[npt.ArrayLike]) -> List[CMatrix]:
    if len(rhos) != model.components:
        raise DimensionMismatch(
            f"Expected {model.components} components, got {len(rhos)}", field="rhos"
        )
    out = []
    for k, rho in enumerate(rhos):
        r = require_square(rho, f"rhos[{k}]")
        if r.shape[0] != model.dim:
            raise DimensionMismatch(f"rhos[{k}] must be {model.dim}x{model.dim}", field=f"rhos[{k}]")
        out.append(r)
    return out


def generalized_oracle(model: GeneralizedLindbladModel, rhos: Sequence[npt.ArrayLike]) -> List[CMatrix]:
    """Time derivatives of every component by direct matrix products."""
    comps = _check_components(model, rhos)
    out = []
    for k in range(model.components):
        h = model.hamiltonians[k]
        d = -1j * (h @ comps[k] - comps[k] @ h)
        for tr in model.transitions:
            if tr.to_k == k:
                d = d + tr.matrix @ comps[tr.from_j] @ tr.matrix.conj().T
            if tr.from_j == k:
                rr = tr.matrix.conj().T @ tr.matrix
                d = d - 0.5 * (rr @ comps[k] + comps[k] @ rr)
        out.append(d)
    return out


def stack(rhos: Sequence[npt.ArrayLike]) -> WaveFunctionVector:
    """Stack K component matrices into one wave-function vector."""
    mats = [require_square(r, f"rhos[{k}]") for k, r in enumerate(rhos)]
    if not mats:
        raise DimensionMismatch("At least one component is required", field="rhos")
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise DimensionMismatch("All components must share one shape", field="rhos")
    return WaveFunctionVector(
        dim=n, components=len(mats), stacked=np.concatenate([m.reshape(-1) for m in mats])
    )


def unstack(psi: WaveFunctionVector) -> List[CMatrix]:
    """Split a wave-function vector into its component matrices."""
    return psi.matrices()


def reduced_state(rhos: Sequence[npt.ArrayLike]) -> CMatrix:
    """Physical state ``sum_k rho_k``."""
    comps = [np.asarray(r, dtype=np.complex128) for r in rhos]
    return np.sum(comps, axis=0)


def _validate_initial_components(model: GeneralizedLindbladModel, rhos0: Sequence[npt.ArrayLike]) -> List[CMatrix]:
    settings = get_settings()
    comps = _check_components(model, rhos0)
    for k, r in enumerate(comps):
        if np.max(np.abs(r - r.conj().T)) > 1e-9 * max(1.0, float(np.max(np.abs(r)))):
            raise PreconditionError(f"rhos0[{k}] must be Hermitian", field=f"rhos0[{k}]")
        if np.linalg.eigvalsh((r + r.conj().T) / 2)[0] < -1e-8:
            raise PreconditionError(f"rhos0[{k}] must be positive semidefinite", field=f"rhos0[{k}]")
    total = sum(np.trace(r) for r in comps)
    if abs(total - 1.0) > settings.tol_state_trace:
        raise PreconditionError(
            f"Component traces must sum to 1, got {complex(total).real:.12g}", field="rhos0"
        )
    return comps


def propagate_blocks(
    model: GeneralizedLindbladModel, rhos0: Sequence[npt.ArrayLike], t: float
) -> List[CMatrix]:
    """
    Evolve every component for time ``t`` with ``expm(-i H t)``.

    Raises:
        PreconditionError: If t < 0, a component is not Hermitian PSD, or
            the traces do not sum to one
    """
    if t < 0:
        raise PreconditionError(f"t must be >= 0, got {t}", field="t")
    comps = _validate_initial_components(model, rhos0)
    flat = build_block_hamiltonian(model).flattened
    psi = expm(-1j * flat * t) @ stack(comps).stacked
    return WaveFunctionVector(dim=model.dim, components=model.components, stacked=psi).matrices()


def generalized_damping_basis(model: GeneralizedLindbladModel) -> GeneralizedDampingBasis:
    """
    Eigen-operator sets of ``-i H``.

    Each eigenvector is split into K component operators; left vectors use
    the same transpose rule as the Markovian basis so that
    ``sum_k Tr(A_k^mu B_k^nu) = delta``.
    """
    n, n_comp = model.dim, model.components
    n2 = n * n
    system = eig_full(-1j * build_block_hamiltonian(model).flattened)
    rights = []
    lefts = []
    for i in range(len(system)):
        r = system.right_vectors[:, i]
        l_row = system.left_vectors[i, :]
        rights.append(tuple(frozen(r[k * n2:(k + 1) * n2].reshape(n, n)) for k in range(n_comp)))
        lefts.append(tuple(frozen(l_row[k * n2:(k + 1) * n2].reshape(n, n).T) for k in range(n_comp)))
    return GeneralizedDampingBasis(
        eigenvalues=system.eigenvalues,
        right_ops=tuple(rights),
        left_ops=tuple(lefts),
        system=system,
    )


def propagate_blocks_spectral(
    basis: GeneralizedDampingBasis, rhos0: Sequence[npt.ArrayLike], t: float
) -> List[CMatrix]:
    """``sum_nu exp(lambda_nu t) (sum_k Tr(B_k rho_k)) {A_k}``."""
    comps = [np.asarray(r, dtype=np.complex128) for r in rhos0]
    out = [np.zeros_like(c) for c in comps]
    for lam, a_ops, b_ops in basis.members():
        weight = np.exp(lam * t) * sum(np.trace(b @ c) for b, c in zip(b_ops, comps))
        for k, a in enumerate(a_ops):
            out[k] = out[k] + weight * a
    return out


def total_purity_rate(model: GeneralizedLindbladModel, rhos: Sequence[npt.ArrayLike]) -> float:
    """``d/dt Tr(rho_S^2)`` for ``rho_S = sum_k rho_k``."""
    derivs = generalized_oracle(model, rhos)
    rho_s = reduced_state(rhos)
    d_s = reduced_state(derivs)
    return float(2.0 * np.trace(rho_s @ d_s).real)


def ddfs_block_hamiltonian(
    model: GeneralizedLindbladModel, betas: Dict[Tuple[int, int], complex]
) -> CMatrix:
    """
    Block generator restricted to vectors with ``R_kj^l Phi = beta_k^l Phi``.

    ``betas`` maps ``(k, lambda)`` to the common eigenvalue; the operator
    acts as the full block generator on every ``e_k kron Phi``.
    """
    n, n_comp = model.dim, model.components
    n2 = n * n
    eye = np.eye(n)
    trans = model.transition_map()
    flat = np.zeros((n_comp * n2, n_comp * n2), dtype=np.complex128)
    for k in range(n_comp):
        h = model.hamiltonians[k]
        diag = kron(h, eye) - kron(eye, ancilla_conjugate(h))
        for (p, j, lam), r in trans.items():
            if j != k:
                continue
            beta = betas.get((p, lam), 0.0)
            diag = diag - 0.5j * beta * kron(r.conj().T, eye)
            diag = diag - 0.5j * np.conj(beta) * kron(eye, ancilla_conjugate(r).conj().T)
        flat[k * n2:(k + 1) * n2, k * n2:(k + 1) * n2] = diag
    for (k, j, lam), r in trans.items():
        beta = betas.get((k, lam), 0.0)
        flat[k * n2:(k + 1) * n2, j * n2:(j + 1) * n2] += 1j * beta * kron(eye, ancilla_conjugate(r))
    return flat


def ddfs_check_generalized(
    model: GeneralizedLindbladModel, basis: Sequence[VectorLike], tol: float = 1e-10
) -> DDFSReport:
    """
    Decoherence-free subspace check for generalized models.

    For every ``(k, lambda)`` the operators ``R_kj^lambda`` must share the
    eigenvalue beta_k^lambda on every basis vector for every source j (a
    missing transition counts as the zero operator). The span, placed in
    every component, must be invariant under ``ddfs_block_hamiltonian``,
    and the reduced purity must be stationary.

    Raises:
        DependentBasis: If the vectors are linearly dependent
        NotHermitianSymmetric: If a vector is not a vectorized Hermitian matrix
    """
    n, n_comp = model.dim, model.components
    n2 = n * n
    mat = normalized_basis(basis, n2)
    check_hermitian_symmetry(mat, tol)
    eye = np.eye(n)
    trans = model.transition_map()
    zero = np.zeros((n, n), dtype=np.complex128)

    betas: Dict[Tuple[int, int], complex] = {}
    labels: Dict[str, complex] = {}
    residuals: Dict[str, float] = {}
    for k in range(n_comp):
        for lam in range(model.channels):
            if not any((k, j, lam) in trans for j in range(n_comp)):
                continue
            ops = [trans.get((k, j, lam), zero) for j in range(n_comp)]
            phi0 = mat[:, 0]
            beta = complex(np.vdot(phi0, kron(ops[0], eye) @ phi0))
            worst = 0.0
            for op in ops:
                lifted = kron(op, eye)
                worst = max(worst, float(np.max(np.linalg.norm(lifted @ mat - beta * mat, axis=0))))
            betas[(k, lam)] = beta
            labels[f"R{k}.{lam}"] = beta
            residuals[f"R{k}.{lam}"] = worst

    h_ddfs = ddfs_block_hamiltonian(model, betas)
    placed = np.zeros((n_comp * n2, n_comp * mat.shape[1]), dtype=np.complex128)
    for k in range(n_comp):
        placed[k * n2:(k + 1) * n2, k * mat.shape[1]:(k + 1) * mat.shape[1]] = mat
    proj = span_projector(placed)
    leak = (np.eye(n_comp * n2) - proj) @ h_ddfs @ placed
    defect = float(np.max(np.linalg.norm(leak, axis=0)))

    rates = []
    for i in range(mat.shape[1]):
        phi = mat[:, i].reshape(n, n)
        for k in range(n_comp):
            rhos = [phi if c == k else np.zeros_like(phi) for c in range(n_comp)]
            rates.append(total_purity_rate(model, rhos))

    worst = max([defect] + list(residuals.values()) + [abs(r) for r in rates])
    verdict = worst <= tol
    logger.info(f"Generalized DDFS check: verdict={verdict}, worst residual {worst:.3e}")
    return DDFSReport(
        betas=labels,
        eigen_residuals=residuals,
        invariance_defect=defect,
        purity_rates=rates,
        tol=tol,
        verdict=verdict,
    )


def generator_trajectory(
    model_factory: Callable[[float], GeneralizedLindbladModel],
    times: Sequence[float],
    with_midpoints: bool = True,
) -> GeneratorTrajectory:
    """Sample the block generator of ``model_factory(t)`` on a grid (and interval midpoints)."""
    grid = np.asarray(times, dtype=float)
    mats = [build_block_hamiltonian(model_factory(float(t))).flattened for t in grid]
    mids = None
    if with_midpoints:
        centres = 0.5 * (grid[:-1] + grid[1:])
        mids = [build_block_hamiltonian(model_factory(float(t))).flattened for t in centres]
    return GeneratorTrajectory(times=grid, matrices=np.array(mats), midpoints=None if mids is None else np.array(mids))


def step_propagators(gen: GeneratorTrajectory) -> List[CMatrix]:
    """``expm(-i H(t_mid) h)`` for every grid interval."""
    h = np.diff(gen.times)
    mids = np.array([gen.midpoint(i) for i in range(gen.steps)])
    return list(scipy.linalg.expm(-1j * mids * h[:, None, None]))


def propagate_time_dependent(
    gen: GeneratorTrajectory,
    psi0: WaveFunctionVector,
    propagators: Optional[Sequence[CMatrix]] = None,
) -> List[WaveFunctionVector]:
    """
    Exact reference evolution under a sampled generator.

    The generator is held at its midpoint value on each interval.
    """
    if psi0.stacked.size != gen.dim:
        raise DimensionMismatch(
            f"State length {psi0.stacked.size} does not match generator dimension {gen.dim}",
            field="psi0",
        )
    steps = propagators if propagators is not None else step_propagators(gen)
    psi = np.array(psi0.stacked)
    states = [psi0]
    for u in steps:
        psi = u @ psi
        states.append(WaveFunctionVector(dim=psi0.dim, components=psi0.components, stacked=psi))
    return states
