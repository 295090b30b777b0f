"""
Dynamical invariants and geometric phases under a time-dependent
effective Hamiltonian.

Eigen-tracks are linked between neighbouring grid points by maximal
left/right overlap and put in the continuity gauge: ``<l|r> = 1``,
``||r|| = 1`` and ``<l(t_i)|r(t_{i+1})>`` real positive. The geometric
phase of a track is ``i int <l|dr/dt> dt`` (central differences,
trapezoid rule); its dynamical exponent is ``-i int <l|H_T|r> dt``.
"""

import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy.integrate import trapezoid
from scipy.optimize import linear_sum_assignment

from ..config import get_settings
from ..exceptions import DegenerateTrack, DimensionMismatch, StepTooCoarse, ZeroOverlap
from ..models.lindblad import LindbladModel
from ..models.trajectories import EigenTrack, GeneratorTrajectory, InvariantTrajectory, PhaseResult
from ..utils.logging_config import LoggingDecorator
from ..utils.numerics import CMatrix, commutator, eig_full, frozen, require_square
from .lindblad import build_effective_hamiltonian

logger = logging.getLogger(__name__)

Snapshot = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def effective_generator_trajectory(
    times: Sequence[float],
    hamiltonian: Callable[[float], npt.ArrayLike],
    lindblad_ops: Optional[Callable[[float], Sequence[npt.ArrayLike]]] = None,
    with_midpoints: bool = True,
) -> GeneratorTrajectory:
    """
    Sample H_T(t) of a time-dependent Markovian model.

    Args:
        times: Increasing time grid
        hamiltonian: ``t -> H(t)``
        lindblad_ops: ``t -> [L_k(t)]``; no dissipation when None
        with_midpoints: Also sample the interval centres

    Returns:
        GeneratorTrajectory of effective Hamiltonians
    """

    def at(t: float) -> CMatrix:
        ops = tuple(lindblad_ops(t)) if lindblad_ops is not None else ()
        return build_effective_hamiltonian(
            LindbladModel(hamiltonian=hamiltonian(t), lindblad_ops=ops)
        ).matrix

    grid = np.asarray(times, dtype=float)
    mats = np.array([at(t) for t in grid])
    mids = None
    if with_midpoints:
        mids = np.array([at(t) for t in 0.5 * (grid[:-1] + grid[1:])])
    return GeneratorTrajectory(times=grid, matrices=mats, midpoints=mids)


def default_invariant(gen: GeneratorTrajectory) -> CMatrix:
    """Initial invariant equal to the generator at the first time."""
    return np.array(gen.matrices[0])


def _check_step(gen: GeneratorTrajectory) -> None:
    limit = get_settings().max_step_norm
    norms = np.linalg.norm(gen.matrices, 2, axis=(1, 2))
    h = np.diff(gen.times)
    worst = float(np.max(np.maximum(norms[:-1], norms[1:]) * h))
    if worst > limit:
        raise StepTooCoarse(
            f"max ||H_T|| * step = {worst:.3g} exceeds {limit}", field="times"
        )


def _flow(h: np.ndarray, inv: np.ndarray) -> np.ndarray:
    return -1j * commutator(h, inv)


def _link_tracks(snapshots: List[Snapshot]) -> Tuple[EigenTrack, ...]:
    """
    Join per-time eigensystems into continuous, gauge-fixed tracks.

    Each snapshot is ``(eigenvalues, rights (n, n) columns, lefts (n, n)
    rows, degenerate flags)``.
    """
    n = snapshots[0][0].size
    m = len(snapshots)
    vals = np.empty((m, n), dtype=np.complex128)
    rights = np.empty((m, n, n), dtype=np.complex128)
    lefts = np.empty((m, n, n), dtype=np.complex128)
    flags = np.empty((m, n), dtype=bool)

    w0, r0, l0, d0 = snapshots[0]
    vals[0], rights[0], lefts[0], flags[0] = w0, r0.T, l0, d0
    for i in range(1, m):
        w, r, l_rows, d = snapshots[i]
        overlap = lefts[i - 1] @ r  # [track, candidate]
        _, perm = linear_sum_assignment(-np.abs(overlap))
        r_new = r[:, perm].T
        l_new = l_rows[perm, :]
        c = overlap[np.arange(n), perm]
        phase = np.where(np.abs(c) > 0, c / np.maximum(np.abs(c), 1e-300), 1.0)
        rights[i] = r_new / phase[:, None]
        lefts[i] = l_new * phase[:, None]
        vals[i] = w[perm]
        flags[i] = d[perm]

    return tuple(
        EigenTrack(
            eigenvalues=frozen(vals[:, j]),
            rights=frozen(rights[:, j, :]),
            lefts=frozen(lefts[:, j, :]),
            degenerate=frozen(flags[:, j]),
        )
        for j in range(n)
    )


def _snapshot(matrix: np.ndarray, resolver: Optional[np.ndarray] = None) -> Snapshot:
    """Eigensystem of one matrix; a commuting ``resolver`` splits degenerate clusters."""
    system = eig_full(matrix)
    vals = np.array(system.eigenvalues)
    rights = np.array(system.right_vectors)
    lefts = np.array(system.left_vectors)
    flags = np.zeros(vals.size, dtype=bool)
    for cluster in system.clusters:
        idx = list(cluster)
        if len(idx) == 1:
            continue
        if resolver is None:
            flags[idx] = True
            continue
        sub = eig_full(lefts[idx, :] @ resolver @ rights[:, idx])
        r_c = rights[:, idx] @ sub.right_vectors
        rights[:, idx] = r_c / np.linalg.norm(r_c, axis=0)
        lefts[idx, :] = np.linalg.solve(lefts[idx, :] @ rights[:, idx], lefts[idx, :])
        for sub_cluster in sub.clusters:
            if len(sub_cluster) > 1:
                flags[[idx[s] for s in sub_cluster]] = True
    return vals, rights, lefts, flags


@LoggingDecorator.log_execution()
def propagate_invariant(gen: GeneratorTrajectory, i0: npt.ArrayLike) -> InvariantTrajectory:
    """
    Integrate ``dI/dt = -i [H_T(t), I]`` with classical RK4.

    Stage generators are the grid values and the interval midpoints.

    Raises:
        StepTooCoarse: If ``||H_T|| * step`` exceeds the configured limit
        NonDiagonalizable: If the invariant is defective at a grid point
    """
    inv0 = require_square(i0, "i0")
    if inv0.shape[0] != gen.dim:
        raise DimensionMismatch(
            f"i0 must be {gen.dim}x{gen.dim}, got {inv0.shape}", field="i0"
        )
    _check_step(gen)

    t = gen.times
    invariants = np.empty((gen.steps + 1, gen.dim, gen.dim), dtype=np.complex128)
    invariants[0] = inv0
    current = inv0
    for i in range(gen.steps):
        h = t[i + 1] - t[i]
        h0, hm, h1 = gen.matrices[i], gen.midpoint(i), gen.matrices[i + 1]
        k1 = _flow(h0, current)
        k2 = _flow(hm, current + 0.5 * h * k1)
        k3 = _flow(hm, current + 0.5 * h * k2)
        k4 = _flow(h1, current + h * k3)
        current = current + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        invariants[i + 1] = current

    defect = 0.0
    if gen.steps >= 2:
        d_inv = (invariants[2:] - invariants[:-2]) / (t[2:] - t[:-2])[:, None, None]
        hs, mid = gen.matrices[1:-1], invariants[1:-1]
        residual = 1j * d_inv - (hs @ mid - mid @ hs)
        defect = float(np.max(np.linalg.norm(residual, 2, axis=(1, 2))))

    tracks = _link_tracks([_snapshot(inv) for inv in invariants])
    drift = max(float(np.max(np.abs(tr.eigenvalues - tr.eigenvalues[0]))) for tr in tracks)
    logger.debug(f"Invariant defect {defect:.3e}, eigenvalue drift {drift:.3e}")
    return InvariantTrajectory(generator=gen, invariants=frozen(invariants), tracks=tracks, defect=defect)


def apply_continuity_gauge(rights: np.ndarray, lefts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Re-gauge a track: unit-norm rights, ``<l|r> = 1`` and real positive
    overlaps between neighbouring grid points.

    Raises:
        DegenerateTrack: If neighbouring vectors are (numerically) orthogonal
    """
    r = np.array(rights, dtype=np.complex128)
    lv = np.array(lefts, dtype=np.complex128)
    norms = np.linalg.norm(r, axis=1)
    r /= norms[:, None]
    lv *= norms[:, None]
    lv /= np.einsum("ij,ij->i", lv, r)[:, None]
    for i in range(1, r.shape[0]):
        c = lv[i - 1] @ r[i]
        if abs(c) < 1e-8:
            raise DegenerateTrack(f"Track lost between grid points {i - 1} and {i}", field="track")
        phase = c / abs(c)
        r[i] /= phase
        lv[i] *= phase
    return r, lv


def _phase_integrals(
    times: np.ndarray, generators: np.ndarray, rights: np.ndarray, lefts: np.ndarray
) -> Tuple[complex, complex]:
    """``(i int <l|dr>, -i int <l|H|r>)`` by central differences and the trapezoid rule."""
    dr = np.gradient(rights, times, axis=0)
    geometric = trapezoid(1j * np.einsum("ij,ij->i", lefts, dr), times)
    dynamical = trapezoid(-1j * np.einsum("ia,iab,ib->i", lefts, generators, rights), times)
    return complex(geometric), complex(dynamical)


def _track_phase(
    track: EigenTrack,
    j: int,
    times: np.ndarray,
    generators: np.ndarray,
    closure: Optional[bool],
) -> PhaseResult:
    """
    Phase of one track.

    ``closure=True`` folds ``-i log <l(0)|r(T)>`` into the geometric phase
    (cyclic), ``False`` reports ``arg <l(0)|r(T)>`` as the noncyclic
    correction, ``None`` picks cyclic when ``r(T)`` returns to the ray of
    ``r(0)``.
    """
    settings = get_settings()
    if track.is_degenerate:
        first = int(np.argmax(track.degenerate))
        raise DegenerateTrack(
            f"Track {j} is degenerate at grid point {first}", field="track"
        )
    rights, lefts = apply_continuity_gauge(track.rights, track.lefts)
    geometric, dynamical = _phase_integrals(times, generators, rights, lefts)

    overlap = complex(lefts[0] @ rights[-1])
    if abs(overlap) < settings.zero_overlap:
        raise ZeroOverlap(f"<l(0)|r(T)> vanishes for track {j}", field="track")
    cyclic_defect = float(np.linalg.norm(rights[-1] - overlap * rights[0]))
    is_cyclic = cyclic_defect <= settings.cyclic_tol

    if closure is None:
        closure = is_cyclic
    if closure:
        if not is_cyclic:
            logger.warning(
                f"Track {j} is not cyclic (defect {cyclic_defect:.3e}); closing with <l(0)|r(T)>",
                extra={"track": j},
            )
        return PhaseResult(
            track_index=j,
            geometric=geometric - 1j * np.log(overlap),
            dynamical=dynamical,
            noncyclic_correction=0.0,
        )
    return PhaseResult(
        track_index=j,
        geometric=geometric,
        dynamical=dynamical,
        noncyclic_correction=float(np.angle(overlap)),
    )


def _track(tracks: Sequence[EigenTrack], j: int) -> EigenTrack:
    if not 0 <= j < len(tracks):
        raise IndexError(f"Track index {j} outside [0, {len(tracks)})")
    return tracks[j]


def geometric_phase_cyclic(traj: InvariantTrajectory, j: int) -> PhaseResult:
    """
    Geometric phase of invariant track ``j`` over a cyclic evolution.

    Raises:
        DegenerateTrack: If the track meets a degenerate eigenvalue
    """
    gen = traj.generator
    return _track_phase(_track(traj.tracks, j), j, gen.times, gen.matrices, closure=True)


def geometric_phase_noncyclic(traj: InvariantTrajectory, j: int) -> PhaseResult:
    """
    Geometric phase of invariant track ``j`` plus ``arg <l(0)|r(T)>``.

    Raises:
        DegenerateTrack: If the track meets a degenerate eigenvalue
        ZeroOverlap: If ``r(T)`` is orthogonal to ``l(0)``
    """
    gen = traj.generator
    return _track_phase(_track(traj.tracks, j), j, gen.times, gen.matrices, closure=False)


def instantaneous_tracks(
    gen: GeneratorTrajectory, resolver: Optional[GeneratorTrajectory] = None
) -> Tuple[EigenTrack, ...]:
    """Eigen-tracks of the generator itself, optionally split by a commuting resolver."""
    if resolver is not None and resolver.matrices.shape != gen.matrices.shape:
        raise DimensionMismatch("resolver must be sampled like the generator", field="resolver")
    return _link_tracks(
        [
            _snapshot(m, None if resolver is None else resolver.matrices[i])
            for i, m in enumerate(gen.matrices)
        ]
    )


def geometric_phase_adiabatic(
    gen: GeneratorTrajectory, j: int, resolver: Optional[GeneratorTrajectory] = None
) -> PhaseResult:
    """
    Geometric phase along instantaneous eigen-track ``j`` of H_T(t).

    Cyclic closure is applied when the track returns to its initial ray;
    otherwise ``arg <l(0)|r(T)>`` is reported as the noncyclic correction.

    Args:
        gen: Sampled effective Hamiltonian
        j: Track index (eigenvalue order at the first time)
        resolver: Operator trajectory commuting with H_T used to label
            vectors inside degenerate clusters

    Raises:
        DegenerateTrack: If the track meets an unresolved degenerate cluster
    """
    tracks = instantaneous_tracks(gen, resolver)
    return _track_phase(_track(tracks, j), j, gen.times, gen.matrices, closure=None)


def pancharatnam_phase(lefts: npt.ArrayLike, rights: npt.ArrayLike) -> float:
    """
    Discrete overlap phase ``-arg prod <l_i|r_{i+1}> / <l_i|r_i>`` of a
    closed loop.

    The last sample is taken to be the same point as the first and is
    replaced by it, so the result does not depend on per-point gauges.
    """
    lv = np.asarray(lefts, dtype=np.complex128)[:-1]
    r = np.asarray(rights, dtype=np.complex128)[:-1]
    forward = np.einsum("ij,ij->i", lv, np.roll(r, -1, axis=0))
    diagonal = np.einsum("ij,ij->i", lv, r)
    factors = forward / diagonal
    unit = np.prod(factors / np.abs(factors))
    return float(-np.angle(unit))


def propagate_state(gen: GeneratorTrajectory, psi0: npt.ArrayLike) -> np.ndarray:
    """Integrate ``i d/dt psi = H_T psi`` with RK4; returns one row per grid time."""
    psi = np.asarray(psi0, dtype=np.complex128).ravel()
    if psi.size != gen.dim:
        raise DimensionMismatch(f"psi0 must have length {gen.dim}", field="psi0")
    out = np.empty((gen.steps + 1, gen.dim), dtype=np.complex128)
    out[0] = psi
    t = gen.times
    for i in range(gen.steps):
        h = t[i + 1] - t[i]
        h0, hm, h1 = gen.matrices[i], gen.midpoint(i), gen.matrices[i + 1]
        k1 = -1j * (h0 @ psi)
        k2 = -1j * (hm @ (psi + 0.5 * h * k1))
        k3 = -1j * (hm @ (psi + 0.5 * h * k2))
        k4 = -1j * (h1 @ (psi + h * k3))
        psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = psi
    return out


def coefficient_trajectory(
    gen: GeneratorTrajectory, psi0: npt.ArrayLike, j: int, traj: InvariantTrajectory
) -> np.ndarray:
    """``<l_j(t)|psi(t)>`` along the grid, in the continuity gauge of track ``j``."""
    track = _track(traj.tracks, j)
    _, lefts = apply_continuity_gauge(track.rights, track.lefts)
    states = propagate_state(gen, psi0)
    return np.einsum("ij,ij->i", lefts, states)
