"""Effective Hamiltonians for deformed su(2) and cascade multilevel models."""

from ._core import (
    CascadeModel,
    Error,
    algebra_residuals,
    alpha1,
    alpha2,
    basis_states,
    effective_hamiltonian,
    eigvalsh,
    evolve,
    full_hamiltonian,
    lie_transform,
    psi_ladder,
    reference_energies,
    resonant_pair_coupling,
    run_command,
    sector_states,
)

__all__ = [
    "CascadeModel",
    "Error",
    "algebra_residuals",
    "alpha1",
    "alpha2",
    "basis_states",
    "effective_hamiltonian",
    "eigvalsh",
    "evolve",
    "full_hamiltonian",
    "lie_transform",
    "psi_ladder",
    "reference_energies",
    "resonant_pair_coupling",
    "run_command",
    "sector_states",
]
