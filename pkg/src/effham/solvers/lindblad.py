"""
Markovian master equations through the effective Hamiltonian.

A density matrix rho is mapped to the composite vector ``vec(rho)`` with
the system index slow (``vec(rho)[m*N + n] = rho[m, n]``). With
``vec(X rho Y) = (X kron Y^T) vec(rho)`` the master equation becomes
``i d/dt vec(rho) = H_T vec(rho)`` with

    H_T = Heff kron I - I kron conj(Heff) + i sum_k L_k kron conj(L_k),
    Heff = H - (i/2) sum_k L_k^dag L_k.
"""

import logging
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from ..config import get_settings
from ..exceptions import (
    BadLength,
    DependentBasis,
    DimensionMismatch,
    NotHermitianSymmetric,
    PreconditionError,
)
from ..models.lindblad import (
    CompositeState,
    DampingBasis,
    DDFSReport,
    EffectiveHamiltonian,
    LindbladModel,
    SteadyState,
)
from ..utils.logging_config import LoggingDecorator
from ..utils.numerics import (
    CMatrix,
    as_cmatrix,
    eig_full,
    expm,
    frozen,
    kron,
    null_space,
    require_square,
)

logger = logging.getLogger(__name__)

VectorLike = Union[CompositeState, npt.ArrayLike]


def vectorize(rho: npt.ArrayLike) -> CompositeState:
    """Map an N x N matrix to its composite vector (row-major)."""
    arr = require_square(rho, "rho")
    return CompositeState(dim=arr.shape[0], amplitudes=arr.reshape(-1))


def unvectorize(psi: VectorLike) -> CMatrix:
    """
    Map a composite vector back to its N x N matrix.

    Raises:
        BadLength: If the length is not a perfect square
    """
    if isinstance(psi, CompositeState):
        return psi.amplitudes.reshape(psi.dim, psi.dim).copy()
    vec = np.asarray(psi, dtype=np.complex128).ravel()
    n = int(round(np.sqrt(vec.size)))
    if n * n != vec.size or n == 0:
        raise BadLength(f"Length {vec.size} is not a perfect square", field="psi")
    return vec.reshape(n, n).copy()


def ancilla_conjugate(op: npt.ArrayLike) -> CMatrix:
    """Ancilla copy of an operator: the elementwise complex conjugate."""
    return np.conj(require_square(op, "op"))


def dissipative_hamiltonian(model: LindbladModel) -> CMatrix:
    """``H - (i/2) sum_k L_k^dag L_k``."""
    heff = model.hamiltonian.astype(np.complex128)
    for op in model.lindblad_ops:
        heff = heff - 0.5j * (op.conj().T @ op)
    return heff


def build_effective_hamiltonian(model: LindbladModel) -> EffectiveHamiltonian:
    """Assemble H_T on the doubled space."""
    eye = np.eye(model.dim)
    heff = dissipative_hamiltonian(model)
    matrix = kron(heff, eye) - kron(eye, ancilla_conjugate(heff))
    for op in model.lindblad_ops:
        matrix = matrix + 1j * kron(op, ancilla_conjugate(op))
    return EffectiveHamiltonian(matrix=matrix, source=model)


def superoperator_oracle(model: LindbladModel, rho: npt.ArrayLike) -> CMatrix:
    """Liouvillian action by direct matrix products."""
    r = require_square(rho, "rho")
    if r.shape[0] != model.dim:
        raise DimensionMismatch(f"rho must be {model.dim}x{model.dim}", field="rho")
    h = model.hamiltonian
    out = -1j * (h @ r - r @ h)
    for op in model.lindblad_ops:
        op_dag = op.conj().T
        ldl = op_dag @ op
        out = out - 0.5 * (ldl @ r + r @ ldl - 2.0 * op @ r @ op_dag)
    return out


def _validate_initial(rho0: npt.ArrayLike, dim: int) -> CMatrix:
    settings = get_settings()
    r = require_square(rho0, "rho0")
    if r.shape[0] != dim:
        raise DimensionMismatch(f"rho0 must be {dim}x{dim}", field="rho0")
    if np.max(np.abs(r - r.conj().T)) > 1e-9 * max(1.0, float(np.max(np.abs(r)))):
        raise PreconditionError("rho0 must be Hermitian", field="rho0")
    if abs(np.trace(r) - 1.0) > settings.tol_state_trace:
        raise PreconditionError(
            f"rho0 must have unit trace, got {np.trace(r).real:.12g}", field="rho0"
        )
    return r


def propagate(model: LindbladModel, rho0: npt.ArrayLike, t: float) -> CMatrix:
    """
    Evolve ``rho0`` for time ``t`` with ``expm(-i H_T t)``.

    Raises:
        PreconditionError: If t < 0 or rho0 is not a unit-trace Hermitian matrix
    """
    if t < 0:
        raise PreconditionError(f"t must be >= 0, got {t}", field="t")
    r = _validate_initial(rho0, model.dim)
    h_t = build_effective_hamiltonian(model).matrix
    psi = expm(-1j * h_t * t) @ r.reshape(-1)
    return unvectorize(psi)


@LoggingDecorator.log_execution()
def trajectory(
    model: LindbladModel, rho0: npt.ArrayLike, times: Sequence[float]
) -> List[CMatrix]:
    """
    Propagate ``rho0`` (given at ``times[0]``) to every time in ``times``.

    One step propagator is built per distinct spacing, so a uniform grid
    costs a single matrix exponential.
    """
    grid = np.asarray(times, dtype=float)
    if grid.size == 0:
        return []
    if np.any(np.diff(grid) < 0):
        raise PreconditionError("times must be nondecreasing", field="times")
    r = _validate_initial(rho0, model.dim)
    h_t = build_effective_hamiltonian(model).matrix

    cache: Dict[float, CMatrix] = {}
    psi = r.reshape(-1)
    states = [r.copy()]
    for dt in np.diff(grid):
        key = round(float(dt), 15)
        if key not in cache:
            cache[key] = expm(-1j * h_t * dt)
        psi = cache[key] @ psi
        states.append(unvectorize(psi))
    return states


def purity_rate(model: LindbladModel, rho: npt.ArrayLike) -> float:
    """``d/dt Tr(rho^2) = <Psi| i (H_T^dag - H_T) |Psi>``."""
    psi = vectorize(rho).amplitudes
    h_t = build_effective_hamiltonian(model).matrix
    return float(np.vdot(psi, 1j * (h_t.conj().T - h_t) @ psi).real)


def damping_basis(model: LindbladModel) -> DampingBasis:
    """
    Right/left eigen-operators of the Liouvillian.

    Right vectors of ``-i H_T`` become A_nu; left row vectors become B_nu
    through ``B = reshape(l).T`` so that ``Tr(A_mu B_nu) = l_nu . r_mu``.
    """
    n = model.dim
    system = eig_full(-1j * build_effective_hamiltonian(model).matrix)
    right = tuple(
        frozen(system.right_vectors[:, i].reshape(n, n)) for i in range(len(system))
    )
    left = tuple(
        frozen(system.left_vectors[i, :].reshape(n, n).T) for i in range(len(system))
    )
    return DampingBasis(
        eigenvalues=system.eigenvalues,
        right_ops=right,
        left_ops=left,
        system=system,
    )


def propagate_spectral(basis: DampingBasis, rho0: npt.ArrayLike, t: float) -> CMatrix:
    """``sum_nu exp(lambda_nu t) Tr(B_nu rho0) A_nu``."""
    r = as_cmatrix(rho0, "rho0")
    out = np.zeros_like(basis.right_ops[0], dtype=np.complex128)
    for lam, a, b in zip(basis.eigenvalues, basis.right_ops, basis.left_ops):
        out = out + np.exp(lam * t) * np.trace(b @ r) * a
    return out


def hermitian_span(matrices: Sequence[np.ndarray], tol: float = 1e-10) -> List[CMatrix]:
    """
    Hermitian basis of a matrix space closed under the adjoint.

    The Hermitian and anti-Hermitian parts of every input span the space
    over the reals; an SVD of their real coordinates selects an
    orthonormal Hermitian basis of the same dimension.
    """
    if not matrices:
        return []
    candidates = []
    for m in matrices:
        candidates.append((m + m.conj().T) / 2)
        candidates.append((m - m.conj().T) / 2j)
    coords = np.array([np.concatenate([c.real.ravel(), c.imag.ravel()]) for c in candidates])
    _, s, vh = np.linalg.svd(coords, full_matrices=False)
    rank = int(np.sum(s > tol * max(s[0], 1e-300)))
    n = matrices[0].shape[0]
    half = n * n
    basis = []
    for row in vh[:rank]:
        h = (row[:half] + 1j * row[half:]).reshape(n, n)
        basis.append((h + h.conj().T) / 2)
    return basis


def steady_states(model: LindbladModel, tol: Optional[float] = None) -> List[SteadyState]:
    """
    Zero modes of H_T as Hermitian matrices.

    The null space is rotated so that at most one element carries trace;
    it is normalized to unit trace. The remaining elements are traceless,
    returned unnormalized and flagged.
    """
    h_t = build_effective_hamiltonian(model).matrix
    vectors = null_space(h_t, tol)
    if not vectors:
        logger.debug("Effective Hamiltonian is nonsingular; no steady states")
        return []

    herm = hermitian_span([unvectorize(v) for v in vectors])
    traces = np.array([np.trace(h).real for h in herm])
    result: List[SteadyState] = []
    if np.linalg.norm(traces) > 1e-12:
        # Rotate the real span so the trace lives on one element
        u = traces / np.linalg.norm(traces)
        q, _ = np.linalg.qr(np.column_stack([u, np.eye(len(herm))]))
        rotation = q[:, : len(herm)]
        if rotation[:, 0] @ u < 0:
            rotation[:, 0] *= -1
        rotated = [sum(rotation[i, c] * herm[i] for i in range(len(herm))) for c in range(len(herm))]
        lead = rotated[0] / np.trace(rotated[0]).real
        result.append(SteadyState(matrix=frozen(lead), traceless=False))
        for extra in rotated[1:]:
            result.append(SteadyState(matrix=frozen(extra), traceless=True))
    else:
        result = [SteadyState(matrix=frozen(h), traceless=True) for h in herm]

    logger.debug(f"Found {len(result)} steady-state directions")
    return result


def normalized_basis(basis: Sequence[VectorLike], n2: int) -> np.ndarray:
    """Stack basis vectors as unit-norm columns and validate them."""
    if not basis:
        raise DependentBasis("Basis must not be empty", field="basis")
    cols = []
    for i, b in enumerate(basis):
        vec = b.amplitudes if isinstance(b, CompositeState) else np.asarray(b, dtype=np.complex128).ravel()
        if vec.size != n2:
            raise DimensionMismatch(f"basis[{i}] must have length {n2}", field=f"basis[{i}]")
        norm = np.linalg.norm(vec)
        if norm == 0:
            raise DependentBasis(f"basis[{i}] is zero", field=f"basis[{i}]")
        cols.append(vec / norm)
    mat = np.column_stack(cols)
    s = np.linalg.svd(mat, compute_uv=False)
    if s[-1] < 1e-10 * s[0]:
        raise DependentBasis("Basis vectors are linearly dependent", field="basis")
    return mat


def check_hermitian_symmetry(mat: np.ndarray, tol: float) -> None:
    n = int(round(np.sqrt(mat.shape[0])))
    for i in range(mat.shape[1]):
        m = mat[:, i].reshape(n, n)
        if np.max(np.abs(m - m.conj().T)) > max(tol, 1e-12):
            raise NotHermitianSymmetric(
                f"basis[{i}] does not unvectorize to a Hermitian matrix",
                field=f"basis[{i}]",
            )


def span_projector(mat: np.ndarray) -> np.ndarray:
    """Orthogonal projector onto the column span of ``mat``."""
    q, _ = np.linalg.qr(mat)
    return q @ q.conj().T


def ddfs_hamiltonian(model: LindbladModel, betas: Sequence[complex]) -> CMatrix:
    """
    Effective Hamiltonian restricted to common eigenvectors of the L_k.

    On vectors with ``(L_k kron I) Phi = beta_k Phi`` and the Hermitian
    symmetry (hence ``(I kron conj(L_k)) Phi = conj(beta_k) Phi``) this
    operator acts exactly as H_T.
    """
    if len(betas) != len(model.lindblad_ops):
        raise DimensionMismatch("One beta per Lindblad operator is required", field="betas")
    eye = np.eye(model.dim)
    h = model.hamiltonian
    out = kron(h, eye) - kron(eye, ancilla_conjugate(h))
    for beta, op in zip(betas, model.lindblad_ops):
        op_a = ancilla_conjugate(op)
        out = out - 0.5j * beta * kron(op.conj().T, eye)
        out = out - 0.5j * np.conj(beta) * kron(eye, op_a.conj().T)
        out = out + 1j * beta * kron(eye, op_a)
    return out


def ddfs_check(
    model: LindbladModel, basis: Sequence[VectorLike], tol: float = 1e-10
) -> DDFSReport:
    """
    Verify that ``basis`` spans a decoherence-free subspace.

    Checks, on unit-normalized basis vectors:
    (a) each ``L_k kron I`` has a common eigenvalue beta_k (fitted as the
        Rayleigh quotient on the first vector);
    (b) the span is invariant under ``ddfs_hamiltonian``;
    (c) the purity derivative vanishes for every basis vector.

    Raises:
        DependentBasis: If the vectors are linearly dependent
        NotHermitianSymmetric: If a vector is not a vectorized Hermitian matrix
    """
    n = model.dim
    mat = normalized_basis(basis, n * n)
    check_hermitian_symmetry(mat, tol)
    eye = np.eye(n)

    betas: Dict[str, complex] = {}
    residuals: Dict[str, float] = {}
    for k, op in enumerate(model.lindblad_ops):
        lifted = kron(op, eye)
        phi0 = mat[:, 0]
        beta = complex(np.vdot(phi0, lifted @ phi0))
        res = np.linalg.norm(lifted @ mat - beta * mat, axis=0)
        betas[f"L{k}"] = beta
        residuals[f"L{k}"] = float(np.max(res))

    h_ddfs = ddfs_hamiltonian(model, [betas[f"L{k}"] for k in range(len(model.lindblad_ops))])
    proj = span_projector(mat)
    leak = (np.eye(n * n) - proj) @ h_ddfs @ mat
    defect = float(np.max(np.linalg.norm(leak, axis=0)))

    rates = [purity_rate(model, unvectorize(mat[:, i])) for i in range(mat.shape[1])]

    worst = max([defect] + list(residuals.values()) + [abs(r) for r in rates])
    verdict = worst <= tol
    logger.info(f"DDFS check: verdict={verdict}, worst residual {worst:.3e}")
    return DDFSReport(
        betas=betas,
        eigen_residuals=residuals,
        invariance_defect=defect,
        purity_rates=rates,
        tol=tol,
        verdict=verdict,
    )
