"""
Dense complex linear-algebra kernels.

All routines work on small dense matrices (dimension <= 64) and never
mutate their inputs. Eigen-decompositions return biorthonormal left/right
pairs with degenerate clusters resolved into a canonical basis so that
repeated calls on the same input give identical results.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ..config import get_settings
from ..exceptions import DimensionMismatch, NonDiagonalizable, NotAState, PreconditionError

logger = logging.getLogger(__name__)

CMatrix = npt.NDArray[np.complex128]
CVector = npt.NDArray[np.complex128]


def as_cmatrix(a: npt.ArrayLike, name: str = "matrix") -> CMatrix:
    """
    Convert input to a finite complex 2-D array.

    Raises:
        DimensionMismatch: If the input is not two-dimensional
        PreconditionError: If any entry is NaN or infinite
    """
    arr = np.array(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}", field=name)
    if not np.all(np.isfinite(arr)):
        raise PreconditionError(f"{name} has non-finite entries", field=name)
    return arr


def require_square(a: npt.ArrayLike, name: str = "matrix") -> CMatrix:
    """Convert input with ``as_cmatrix`` and check it is square."""
    arr = as_cmatrix(a, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}", field=name)
    max_dim = get_settings().max_dim
    if arr.shape[0] > max_dim:
        raise DimensionMismatch(
            f"{name} has dimension {arr.shape[0]} > {max_dim}", field=name
        )
    return arr


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only copy of ``a``."""
    out = np.array(a, copy=True)
    out.setflags(write=False)
    return out


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> CMatrix:
    """Kronecker product with the first factor as the slow index."""
    return np.kron(as_cmatrix(a, "a"), as_cmatrix(b, "b"))


def expm(a: npt.ArrayLike) -> CMatrix:
    """Matrix exponential by scaling and squaring with a Pade approximant."""
    return np.asarray(scipy.linalg.expm(require_square(a, "a")), dtype=np.complex128)


def commutator(a: npt.ArrayLike, b: npt.ArrayLike) -> CMatrix:
    """Return ``ab - ba``."""
    a_ = require_square(a, "a")
    b_ = require_square(b, "b")
    if a_.shape != b_.shape:
        raise DimensionMismatch(f"Shapes differ: {a_.shape} vs {b_.shape}")
    return a_ @ b_ - b_ @ a_


def operator_norm(a: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def hermitian_sqrt(a: npt.ArrayLike) -> CMatrix:
    """Principal square root of a Hermitian PSD matrix; negative eigenvalues clamp to 0."""
    arr = require_square(a)
    herm = (arr + arr.conj().T) / 2
    w, v = np.linalg.eigh(herm)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def cluster_eigenvalues(values: Sequence[complex], tol: float) -> List[List[int]]:
    """
    Group eigenvalue indices whose values lie within ``tol`` of each other.

    Grouping is transitive (single linkage). Groups are returned sorted by
    descending real part then descending imaginary part of their mean;
    indices inside a group keep ascending order.

    Args:
        values: Eigenvalues
        tol: Absolute clustering distance

    Returns:
        List of index groups
    """
    vals = np.asarray(values, dtype=np.complex128)
    if vals.size == 0:
        return []
    close = np.abs(vals[:, None] - vals[None, :]) <= tol
    n_groups, labels = connected_components(csr_matrix(close), directed=False)

    groups = [sorted(np.flatnonzero(labels == g).tolist()) for g in range(n_groups)]
    means = [complex(vals[g].mean()) for g in groups]
    order = sorted(range(n_groups), key=lambda g: (-means[g].real, -means[g].imag, groups[g][0]))
    return [groups[g] for g in order]


def _fix_column_phase(vectors: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    out = vectors.copy()
    for c in range(out.shape[1]):
        col = out[:, c]
        pivot = int(np.argmax(np.abs(col) - 1e-12 * np.arange(col.size)))
        if abs(col[pivot]) > 0:
            out[:, c] = col * (abs(col[pivot]) / col[pivot])
    return out


def canonical_basis(projector: np.ndarray, rank: int) -> np.ndarray:
    """
    Orthonormal basis of the range of ``projector``.

    Column-pivoted QR makes the basis a function of the subspace only (up
    to rounding), and each column is phase-fixed.
    """
    q, _, _ = scipy.linalg.qr(projector, pivoting=True, mode="economic")
    return _fix_column_phase(q[:, :rank])


@dataclass(frozen=True)
class EigenSystem:
    """
    Biorthonormal eigen-decomposition ``A = R diag(eigenvalues) L``.

    Attributes:
        eigenvalues: Complex eigenvalues, cluster-sorted
        right_vectors: Right eigenvectors as columns
        left_vectors: Left eigenvectors as rows, ``L R = I``
        residual_norm: Largest relative block residual over clusters
        clusters: Index groups of (near-)degenerate eigenvalues
    """

    eigenvalues: np.ndarray
    right_vectors: CMatrix
    left_vectors: CMatrix
    residual_norm: float
    clusters: Tuple[Tuple[int, ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        for arr in (self.eigenvalues, self.right_vectors, self.left_vectors):
            arr.setflags(write=False)

    def __len__(self) -> int:
        return int(self.eigenvalues.size)

    def cluster_of(self, index: int) -> Tuple[int, ...]:
        """Return the cluster containing eigenvalue ``index``."""
        for cluster in self.clusters:
            if index in cluster:
                return cluster
        raise IndexError(index)

    def is_degenerate(self, index: int) -> bool:
        return len(self.cluster_of(index)) > 1

    def reconstruct(self) -> CMatrix:
        """Return ``sum_v lambda_v r_v l_v``."""
        return (self.right_vectors * self.eigenvalues) @ self.left_vectors


def biorthonormal_projector(system: EigenSystem, cluster: Sequence[int]) -> CMatrix:
    """Spectral projector ``R_c L_c`` onto one cluster."""
    idx = list(cluster)
    return system.right_vectors[:, idx] @ system.left_vectors[idx, :]


def _independent(columns: np.ndarray, tol_rank: float) -> bool:
    unit = columns / np.linalg.norm(columns, axis=0)
    sv = np.linalg.svd(unit, compute_uv=False)
    return bool(sv[-1] >= tol_rank * sv[0])


def _cluster_null_bases(
    arr: CMatrix, mean: complex, k: int, threshold: float
) -> Tuple[CMatrix, CMatrix]:
    """
    Right (columns) and left (rows) null bases of ``arr - mean * I`` for a
    cluster of algebraic multiplicity ``k``.

    Raises:
        NonDiagonalizable: If fewer than ``k`` singular values fall below
            ``threshold``
    """
    n = arr.shape[0]
    u, s, vh = scipy.linalg.svd(arr - mean * np.eye(n))
    independent = int(np.sum(s <= threshold))
    if independent < k:
        raise NonDiagonalizable(
            f"Eigenvalue cluster near {mean:.6g} (size {k}) has only "
            f"{independent} independent eigenvectors",
            field="a",
        )
    return vh[n - k:].conj().T, u[:, n - k:].conj().T


def eig_full(
    a: npt.ArrayLike,
    tol_cluster: Optional[float] = None,
    tol_rank: Optional[float] = None,
    tol_eig: Optional[float] = None,
) -> EigenSystem:
    """
    Non-Hermitian eigen-decomposition with left eigenvectors.

    Eigenvalues closer than ``tol_cluster * ||a||`` form a cluster. Each
    cluster gets an orthonormal right basis spanning its spectral subspace
    and the dual left basis, so ``L R = I`` holds globally.

    Args:
        a: Square matrix
        tol_cluster: Relative clustering tolerance
        tol_rank: Relative singular-value threshold for the eigenvector rank test
        tol_eig: Relative residual bound

    Returns:
        EigenSystem sorted by (Re descending, Im descending)

    Raises:
        NonDiagonalizable: If a cluster lacks independent eigenvectors
    """
    settings = get_settings()
    tol_cluster = settings.tol_cluster if tol_cluster is None else tol_cluster
    tol_rank = settings.tol_rank if tol_rank is None else tol_rank
    tol_eig = settings.tol_eig if tol_eig is None else tol_eig

    arr = require_square(a, "a")
    n = arr.shape[0]
    norm = operator_norm(arr)
    scale = norm if norm > 0 else 1.0

    w, vl, vr = scipy.linalg.eig(arr, left=True, right=True)
    lefts = vl.conj().T

    clusters = cluster_eigenvalues(w, tol_cluster * scale)
    right_cols: List[np.ndarray] = []
    left_rows: List[np.ndarray] = []
    out_clusters: List[Tuple[int, ...]] = []
    residual = 0.0
    position = 0

    for cluster in clusters:
        k = len(cluster)
        r_raw = vr[:, cluster] / np.linalg.norm(vr[:, cluster], axis=0)
        l_raw = lefts[cluster, :]
        if k > 1:
            r_null, l_null = _cluster_null_bases(arr, complex(w[cluster].mean()), k, tol_rank * scale)
            # LAPACK may return nearly parallel vectors for an exact degeneracy
            if not (_independent(r_raw, tol_rank) and _independent(l_raw.T, tol_rank)):
                r_raw, l_raw = r_null, l_null
        gram = l_raw @ r_raw
        projector = r_raw @ np.linalg.solve(gram, l_raw)
        r_c = canonical_basis(projector, k) if k > 1 else _fix_column_phase(r_raw)
        l_c = np.linalg.solve(l_raw @ r_c, l_raw)

        block = l_c @ arr @ r_c
        residual = max(
            residual, float(np.linalg.norm(arr @ r_c - r_c @ block, 2)) / scale
        )

        right_cols.append(r_c)
        left_rows.append(l_c)
        out_clusters.append(tuple(range(position, position + k)))
        position += k

    right = np.hstack(right_cols) if right_cols else np.zeros((n, 0), complex)
    left = np.vstack(left_rows) if left_rows else np.zeros((0, n), complex)
    # Global biorthonormalization removes cross-cluster rounding
    left = np.linalg.solve(left @ right, left)
    eigenvalues = np.einsum("ij,jk,ki->i", left, arr, right)

    if residual > tol_eig:
        raise NonDiagonalizable(
            f"Eigen residual {residual:.3e} exceeds {tol_eig:.1e}", field="a"
        )

    return EigenSystem(
        eigenvalues=np.asarray(eigenvalues, dtype=np.complex128),
        right_vectors=right,
        left_vectors=left,
        residual_norm=residual,
        clusters=tuple(out_clusters),
    )


def spectral_projectors(
    a: npt.ArrayLike,
    tol_cluster: Optional[float] = None,
    tol_rank: Optional[float] = None,
) -> Tuple[np.ndarray, List[CMatrix]]:
    """
    Cluster means and spectral projectors of a diagonalizable matrix.

    Lighter than ``eig_full`` for stepping loops: left vectors come from
    inverting the right eigenvector matrix and no canonical bases or
    residuals are computed. Clusters follow the ``eig_full`` ordering.

    Raises:
        NonDiagonalizable: If a cluster lacks independent eigenvectors
    """
    settings = get_settings()
    tol_cluster = settings.tol_cluster if tol_cluster is None else tol_cluster
    tol_rank = settings.tol_rank if tol_rank is None else tol_rank

    arr = require_square(a, "a")
    norm = operator_norm(arr)
    scale = norm if norm > 0 else 1.0
    w, vr = scipy.linalg.eig(arr)

    clusters = cluster_eigenvalues(w, tol_cluster * scale)
    blocks = []
    for cluster in clusters:
        block = vr[:, cluster] / np.linalg.norm(vr[:, cluster], axis=0)
        if len(cluster) > 1 and not _independent(block, tol_rank):
            block, _ = _cluster_null_bases(arr, complex(w[cluster].mean()), len(cluster), tol_rank * scale)
        blocks.append(block)
    right = np.hstack(blocks)
    left = np.linalg.solve(right, np.eye(arr.shape[0], dtype=np.complex128))

    means = np.array([w[c].mean() for c in clusters], dtype=np.complex128)
    projectors = []
    start = 0
    for block in blocks:
        stop = start + block.shape[1]
        projectors.append(right[:, start:stop] @ left[start:stop, :])
        start = stop
    return means, projectors


def null_space(a: npt.ArrayLike, tol: Optional[float] = None) -> List[CVector]:
    """
    Orthonormal basis of ``{v : ||a v|| <= tol ||a||}``.

    Singular values at or below ``tol * ||a||`` define the null space; the
    returned basis is canonical for that subspace.
    """
    tol = get_settings().null_space_tol if tol is None else tol
    arr = require_square(a, "a")
    _, s, vh = scipy.linalg.svd(arr)
    norm = s[0] if s.size else 0.0
    mask = s <= tol * norm
    if not np.any(mask):
        return []
    basis = vh[mask].conj().T
    basis = canonical_basis(basis @ basis.conj().T, basis.shape[1])
    return [basis[:, i].copy() for i in range(basis.shape[1])]


def validate_state(
    rho: npt.ArrayLike,
    name: str = "rho",
    clamp: Optional[float] = None,
    trace_tol: Optional[float] = None,
) -> CMatrix:
    """
    Check that ``rho`` is a density matrix.

    Raises:
        NotAState: If Hermiticity, positivity or unit trace fails
    """
    settings = get_settings()
    clamp = settings.fidelity_clamp if clamp is None else clamp
    trace_tol = settings.tol_state_trace if trace_tol is None else trace_tol

    arr = require_square(rho, name)
    scale = max(1.0, float(np.max(np.abs(arr))))
    if np.max(np.abs(arr - arr.conj().T)) > 1e-9 * scale:
        raise NotAState(f"{name} is not Hermitian", field=name)
    w = np.linalg.eigvalsh((arr + arr.conj().T) / 2)
    if w[0] < -clamp:
        raise NotAState(f"{name} has negative eigenvalue {w[0]:.3e}", field=name)
    if abs(np.trace(arr) - 1.0) > trace_tol:
        raise NotAState(f"{name} has trace {np.trace(arr).real:.12g}", field=name)
    return arr


def fidelity(rho: npt.ArrayLike, sigma: npt.ArrayLike) -> float:
    """
    Fidelity ``Tr sqrt(sqrt(rho) sigma sqrt(rho))`` (not squared).

    Raises:
        NotAState: If either argument is not a density matrix
        DimensionMismatch: If the shapes differ
    """
    r = validate_state(rho, "rho")
    s = validate_state(sigma, "sigma")
    if r.shape != s.shape:
        raise DimensionMismatch(f"Shapes differ: {r.shape} vs {s.shape}")
    sr = hermitian_sqrt(r)
    inner = sr @ s @ sr
    return float(np.trace(hermitian_sqrt(inner)).real)
