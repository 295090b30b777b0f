"""
Adiabaticity of generalized Lindblad dynamics.

Gamma measures the largest inter-cluster coupling ``<L_m|dR_n>`` of the
block generator relative to the spectral gap. The adiabatic reference
evolution suppresses those couplings: every spectral component is
stepped with the exact short-time propagator and projected back onto its
own (moving) spectral subspace, which carries both the dynamical factor
and the geometric factor ``exp(-int <L|dR>)``.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ..config import Settings, get_settings, use_settings
from ..exceptions import AllDegenerate, DimensionMismatch, EffHamError
from ..models.generalized import WaveFunctionVector
from ..models.scan import ScanConfig, ScanGrid
from ..models.trajectories import AdiabaticTrajectory, GeneratorTrajectory
from ..models.two_band import RampSpec, TwoBandParams
from ..utils.logging_config import LoggingDecorator
from ..utils.numerics import CMatrix, EigenSystem, eig_full, fidelity, spectral_projectors
from .generalized import reduced_state, stack, step_propagators
from .two_band import ramp, ramped_generator, stationary_state

logger = logging.getLogger(__name__)


def _orthonormal_cluster(system: EigenSystem, cluster: Sequence[int]) -> Tuple[CMatrix, CMatrix]:
    """Orthonormal right basis of a cluster and its dual left rows."""
    idx = list(cluster)
    q, t = np.linalg.qr(system.right_vectors[:, idx])
    return q, t @ system.left_vectors[idx, :]


def adiabatic_coupling(system: EigenSystem, derivative: npt.ArrayLike) -> float:
    """
    Gamma from an eigensystem and the generator's time derivative.

    For clusters a != b, ``L_a dR_b = L_a (dA) R_b / (lambda_b - lambda_a)``,
    so Gamma is the largest ``||L_a dA R_b|| / |lambda_a - lambda_b|^2``
    with orthonormal right bases. Rescaling or mixing vectors inside a
    cluster leaves the value unchanged.

    Raises:
        AllDegenerate: If the spectrum forms a single cluster
    """
    if len(system.clusters) < 2:
        raise AllDegenerate("No eigenvalue pair with a nonzero gap", field="generator")
    d_a = np.asarray(derivative, dtype=np.complex128)
    bases = [_orthonormal_cluster(system, c) for c in system.clusters]
    means = [complex(system.eigenvalues[list(c)].mean()) for c in system.clusters]

    gamma = 0.0
    for a, (_, l_a) in enumerate(bases):
        for b, (r_b, _) in enumerate(bases):
            if a == b:
                continue
            gap = abs(means[a] - means[b])
            coupling = np.linalg.norm(l_a @ d_a @ r_b, 2)
            gamma = max(gamma, float(coupling) / gap ** 2)
    return gamma


def adiabatic_gamma(gen: GeneratorTrajectory, t_index: int) -> float:
    """
    Gamma of the block generator at grid point ``t_index``.

    The generator derivative uses central differences (second-order
    one-sided at the grid ends).
    """
    if not -len(gen.times) <= t_index < len(gen.times):
        raise IndexError(t_index)
    i = t_index % len(gen.times)
    system = eig_full(-1j * gen.matrices[i])
    return adiabatic_coupling(system, -1j * gen.derivative(i))


def _assign(tracked: np.ndarray, projectors: np.ndarray) -> List[List[int]]:
    """Map every tracked component to the new clusters that continue it."""
    # tr(P_new P_old) / rank(P_new) is close to 1 for a continuing subspace
    ranks = np.maximum(np.abs(np.einsum("cii->c", projectors)), 1.0)
    overlap = np.abs(np.einsum("cij,bji->bc", projectors, tracked)) / ranks
    owners: List[List[int]] = [[] for _ in range(tracked.shape[0])]
    for c in range(projectors.shape[0]):
        owners[int(np.argmax(overlap[:, c]))].append(c)
    for b, owned in enumerate(owners):
        if not owned:
            owned.append(int(np.argmax(overlap[b])))
    return owners


def _total_trace(psi: np.ndarray, dim: int, components: int) -> complex:
    n2 = dim * dim
    diag = np.arange(dim) * (dim + 1)
    return complex(sum(psi[k * n2 + diag].sum() for k in range(components)))


def _adiabatic_steps(
    gen: GeneratorTrajectory, psi0: WaveFunctionVector, propagators: Sequence[CMatrix]
) -> Iterator[Tuple[np.ndarray, float]]:
    """Yield the stacked vector and the trace drift after every step."""
    _, first = spectral_projectors(-1j * gen.matrices[0])
    tracked = np.array(first)
    parts = tracked @ psi0.stacked
    trace0 = _total_trace(psi0.stacked, psi0.dim, psi0.components)
    for i, u in enumerate(propagators):
        _, new = spectral_projectors(-1j * gen.matrices[i + 1])
        projectors = np.array(new)
        owners = _assign(tracked, projectors)
        tracked = np.array([projectors[owned].sum(axis=0) for owned in owners])
        parts = np.einsum("bij,bj->bi", tracked, parts @ u.T)
        psi = parts.sum(axis=0)
        yield psi, abs(_total_trace(psi, psi0.dim, psi0.components) - trace0)


def adiabatic_propagate(
    gen: GeneratorTrajectory,
    psi0: WaveFunctionVector,
    propagators: Optional[Sequence[CMatrix]] = None,
) -> AdiabaticTrajectory:
    """
    Evolve ``psi0`` without transitions between spectral clusters.

    ``psi0`` is split by the spectral projectors of the generator at the
    first time. Each part is advanced with the step propagator and
    projected onto the continuing cluster(s) at the next time; clusters
    are matched by projector overlap, so merging or splitting clusters are
    followed as blocks. The trace is not renormalized; its drift is
    reported.
    """
    _check_state_size(gen, psi0)
    steps = propagators if propagators is not None else step_propagators(gen)

    states = [psi0]
    drift = 0.0
    for psi, step_drift in _adiabatic_steps(gen, psi0, steps):
        drift = max(drift, step_drift)
        states.append(WaveFunctionVector(dim=psi0.dim, components=psi0.components, stacked=psi))

    if drift > get_settings().tol_state_trace:
        logger.warning(f"Adiabatic evolution trace drift {drift:.3e}")
    return AdiabaticTrajectory(times=gen.times, states=tuple(states), trace_drift=drift)


def _check_state_size(gen: GeneratorTrajectory, psi0: WaveFunctionVector) -> None:
    if psi0.stacked.size != gen.dim:
        raise DimensionMismatch(
            f"State length {psi0.stacked.size} does not match generator dimension {gen.dim}",
            field="psi0",
        )


def _final_states(
    gen: GeneratorTrajectory, psi0: WaveFunctionVector
) -> Tuple[WaveFunctionVector, WaveFunctionVector]:
    """Exact and adiabatic states at the last grid time, without per-step records."""
    _check_state_size(gen, psi0)
    props = step_propagators(gen)
    exact = psi0.stacked
    for u in props:
        exact = u @ exact
    adiabatic = psi0.stacked
    for adiabatic, _ in _adiabatic_steps(gen, psi0, props):
        pass

    def record(vec: np.ndarray) -> WaveFunctionVector:
        return WaveFunctionVector(dim=psi0.dim, components=psi0.components, stacked=vec)

    return record(exact), record(adiabatic)


def _scan_cell(args: Tuple[ScanConfig, int, int, Settings]) -> Tuple[float, float, Optional[Dict[str, Any]]]:
    """Gamma and 1 - F for one cell; failures become NaN plus an error record."""
    config, i, j, settings = args
    g1_T = config.gamma1_axis[i]
    dg1_T = config.dgamma1_axis[j]
    with use_settings(settings):
        try:
            spec1 = RampSpec(value_at_T=g1_T, slope_at_T=dg1_T, T=config.T, floor=config.floor)
            spec2 = RampSpec(value_at_T=config.gamma2_T, slope_at_T=config.dgamma2_T, T=config.T, floor=config.floor)
            gen = ramped_generator(spec1, spec2, config.steps)
            if config.initial is None:
                psi0 = stationary_state(TwoBandParams(gamma1=ramp(spec1, 0.0), gamma2=ramp(spec2, 0.0)))
            else:
                psi0 = stack(list(config.initial))

            gamma = adiabatic_gamma(gen, gen.steps)
            exact, adiabatic = _final_states(gen, psi0)
            f = fidelity(reduced_state(exact.matrices()), reduced_state(adiabatic.matrices()))
            return gamma, max(0.0, 1.0 - f), None
        except (EffHamError, np.linalg.LinAlgError) as e:
            error = e.to_dict() if isinstance(e, EffHamError) else {"error": "LINALG", "message": str(e), "field": None}
            record = {"cell": [i, j], "gamma1_T": g1_T, "dgamma1_T": dg1_T, **error}
            logger.warning(f"Scan cell ({i}, {j}) failed: {error['message']}", extra={"cell": [i, j]})
            return float("nan"), float("nan"), record


@LoggingDecorator.log_execution()
def scan(config: ScanConfig, jobs: int = 1) -> ScanGrid:
    """
    Gamma at T and the adiabatic infidelity over the scan grid.

    Cells are independent; with ``jobs > 1`` they run in worker processes
    and are gathered in cell order, so the grid does not depend on ``jobs``.
    """
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    settings = get_settings()
    tasks = [(config, i, j, settings) for i, j in config.cells()]
    logger.info(f"Scanning {len(tasks)} cells with {jobs} job(s)", extra={"steps": config.steps})

    if jobs == 1:
        results = [_scan_cell(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(_scan_cell, tasks))

    n1, n2 = config.shape
    gamma_cap = np.array([r[0] for r in results]).reshape(n1, n2)
    infidelity = np.array([r[1] for r in results]).reshape(n1, n2)
    errors = [r[2] for r in results if r[2] is not None]
    if errors:
        logger.warning(f"{len(errors)} scan cell(s) failed")

    return ScanGrid(
        gamma1_T=np.array(config.gamma1_axis),
        dgamma1_T=np.array(config.dgamma1_axis),
        gamma_cap=gamma_cap,
        infidelity=infidelity,
        params=config.params(),
        errors=errors,
    )
