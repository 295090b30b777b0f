"""
effham solvers package
"""
from .adiabatic import adiabatic_gamma, adiabatic_propagate, scan
from .generalized import (
    build_block_hamiltonian,
    ddfs_check_generalized,
    generalized_damping_basis,
    generator_trajectory,
    propagate_blocks,
    propagate_time_dependent,
    reduced_state,
    stack,
    unstack,
)
from .geometric_phase import (
    default_invariant,
    effective_generator_trajectory,
    geometric_phase_adiabatic,
    geometric_phase_cyclic,
    geometric_phase_noncyclic,
    pancharatnam_phase,
    propagate_invariant,
)
from .lindblad import (
    build_effective_hamiltonian,
    damping_basis,
    ddfs_check,
    propagate,
    steady_states,
    trajectory,
    unvectorize,
    vectorize,
)
from .two_band import build_model, closed_form_solution, eigen_operator_table, steady_state_set

__all__ = [
    # Markovian
    "vectorize",
    "unvectorize",
    "build_effective_hamiltonian",
    "propagate",
    "trajectory",
    "steady_states",
    "damping_basis",
    "ddfs_check",

    # Geometric phases
    "effective_generator_trajectory",
    "default_invariant",
    "propagate_invariant",
    "geometric_phase_cyclic",
    "geometric_phase_noncyclic",
    "geometric_phase_adiabatic",
    "pancharatnam_phase",

    # Generalized
    "build_block_hamiltonian",
    "stack",
    "unstack",
    "reduced_state",
    "propagate_blocks",
    "generalized_damping_basis",
    "ddfs_check_generalized",
    "generator_trajectory",
    "propagate_time_dependent",

    # Adiabaticity
    "adiabatic_gamma",
    "adiabatic_propagate",
    "scan",

    # Two-band model
    "build_model",
    "closed_form_solution",
    "steady_state_set",
    "eigen_operator_table",
]
