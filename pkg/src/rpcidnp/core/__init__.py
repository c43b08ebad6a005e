"""Spin operators and radical-pair system descriptions."""

from .spin_algebra import (
    DensityMatrix,
    OperatorMatrix,
    embed,
    expectation,
    singlet_projector,
    spin_half_operators,
    triplet_projector,
    validate_density_matrix,
)
from .system_model import (
    Nucleus,
    ReactionModel,
    SpectralLine,
    SpinSystem,
    SpinSystemSpec,
    build_hamiltonian,
    initial_state,
    spin_system,
    st_spectrum_analysis,
)

__all__ = [
    "DensityMatrix",
    "OperatorMatrix",
    "embed",
    "expectation",
    "singlet_projector",
    "spin_half_operators",
    "triplet_projector",
    "validate_density_matrix",
    "Nucleus",
    "ReactionModel",
    "SpectralLine",
    "SpinSystem",
    "SpinSystemSpec",
    "build_hamiltonian",
    "initial_state",
    "spin_system",
    "st_spectrum_analysis",
]
