"""
Spin operators on the composite electron-nuclear Hilbert space.

Subsystems are always ordered (electron 1, electron 2, nucleus 1, ...,
nucleus N). Operators are dense complex128 numpy arrays; everything returned
from this module is read-only so values can be shared between threads.
"""

import logging
from functools import reduce
from typing import Sequence, Tuple

import numpy as np
from numpy.typing import NDArray

from ..config import POLICY
from ..errors import ConfigurationError, NumericalIntegrityError


logger = logging.getLogger(__name__)

OperatorMatrix = NDArray[np.complex128]
DensityMatrix = NDArray[np.complex128]

ELECTRON_SLOTS = (0, 1)


def _frozen(matrix: np.ndarray) -> OperatorMatrix:
    out = np.array(matrix, dtype=np.complex128)
    out.setflags(write=False)
    return out


_SX = _frozen([[0.0, 0.5], [0.5, 0.0]])
_SY = _frozen([[0.0, -0.5j], [0.5j, 0.0]])
_SZ = _frozen([[0.5, 0.0], [0.0, -0.5]])


def spin_half_operators() -> Tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """
    Spin-1/2 component operators with hbar = 1.

    Returns:
        The 2x2 (s_x, s_y, s_z) matrices, each with eigenvalues +-1/2
    """
    return _SX, _SY, _SZ


def electron_nuclear_layout(n_nuclei: int) -> Tuple[int, ...]:
    """Subsystem dimensions for two electrons and n spin-1/2 nuclei."""
    return (2, 2) + (2,) * n_nuclei


def embed(op: OperatorMatrix, slot: int, layout: Sequence[int]) -> OperatorMatrix:
    """
    Embed a single-subsystem operator into the composite space.

    Args:
        op: Square operator acting on subsystem `slot`
        slot: Position of the subsystem in `layout`
        layout: Subsystem dimensions in the fixed order

    Returns:
        identity ⊗ ... ⊗ op ⊗ ... ⊗ identity

    Raises:
        ConfigurationError: If the slot is out of range or dimensions disagree
    """
    layout = tuple(int(d) for d in layout)
    if not 0 <= slot < len(layout):
        raise ConfigurationError(f"Slot {slot} is outside layout {layout}")
    op = np.asarray(op, dtype=np.complex128)
    if op.ndim != 2 or op.shape != (layout[slot], layout[slot]):
        raise ConfigurationError(
            f"Operator of shape {op.shape} does not match subsystem dimension "
            f"{layout[slot]} at slot {slot}"
        )
    factors = [op if i == slot else np.eye(d, dtype=np.complex128) for i, d in enumerate(layout)]
    return _frozen(reduce(np.kron, factors))


def spin_vector(slot: int, layout: Sequence[int]) -> Tuple[OperatorMatrix, OperatorMatrix, OperatorMatrix]:
    """Embedded (x, y, z) spin components of a spin-1/2 subsystem."""
    return tuple(embed(component, slot, layout) for component in spin_half_operators())


def identity(layout: Sequence[int]) -> OperatorMatrix:
    """Identity on the composite space."""
    return _frozen(np.eye(int(np.prod(layout)), dtype=np.complex128))


def singlet_projector(layout: Sequence[int]) -> OperatorMatrix:
    """
    Electronic singlet projector Q_S = 1/4 - s1·s2 (identity on the nuclei).

    Args:
        layout: Subsystem dimensions; slots 0 and 1 must be electrons

    Returns:
        Q_S on the full space. Q_T is `identity - Q_S`.
    """
    layout = tuple(layout)
    if len(layout) < 2 or layout[0] != 2 or layout[1] != 2:
        raise ConfigurationError(f"Layout {layout} does not start with two electron spins")
    s1 = spin_vector(0, layout)
    s2 = spin_vector(1, layout)
    s1_dot_s2 = sum(a @ b for a, b in zip(s1, s2))
    return _frozen(0.25 * np.eye(s1_dot_s2.shape[0]) - s1_dot_s2)


def triplet_projector(layout: Sequence[int]) -> OperatorMatrix:
    """Electronic triplet projector Q_T = 1 - Q_S."""
    q_s = singlet_projector(layout)
    return _frozen(np.eye(q_s.shape[0]) - q_s)


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    """[a, b] = ab - ba."""
    return a @ b - b @ a


def max_abs(matrix: np.ndarray) -> float:
    """Largest absolute entry; the norm used by every tolerance check."""
    return float(np.max(np.abs(matrix))) if np.size(matrix) else 0.0


def hermitize(rho: DensityMatrix) -> DensityMatrix:
    """Average a matrix with its conjugate transpose."""
    return 0.5 * (rho + rho.conj().T)


def expectation(rho: DensityMatrix, op: OperatorMatrix) -> float:
    """
    Expectation value Tr(rho · op) of a Hermitian observable.

    Args:
        rho: Density matrix (normalized or not)
        op: Hermitian operator of the same dimension

    Returns:
        Real part of the trace

    Raises:
        ConfigurationError: If the dimensions differ
        NumericalIntegrityError: If the imaginary residue exceeds tolerance
    """
    if rho.shape != op.shape:
        raise ConfigurationError(f"Dimension mismatch: rho {rho.shape} vs operator {op.shape}")
    # Tr(A B) without forming the product
    value = np.sum(rho * op.T)
    if abs(value.imag) > POLICY.imaginary_residue_tol:
        raise NumericalIntegrityError(
            f"Expectation value has imaginary residue {value.imag:.3e}; "
            "state or observable is not Hermitian"
        )
    return float(value.real)


def min_eigenvalue(rho: DensityMatrix) -> float:
    """Smallest eigenvalue of the Hermitian part of rho."""
    return float(np.linalg.eigvalsh(hermitize(rho))[0])


def validate_density_matrix(rho: DensityMatrix) -> None:
    """
    Check the DensityMatrix invariants (hermiticity, positivity, trace).

    Raises:
        NumericalIntegrityError: If any invariant is violated
    """
    deviation = max_abs(rho - rho.conj().T)
    if deviation > POLICY.hermiticity_tol:
        raise NumericalIntegrityError(f"Density matrix is not Hermitian (deviation {deviation:.3e})")
    lowest = min_eigenvalue(rho)
    if lowest < POLICY.positivity_warn:
        raise NumericalIntegrityError(f"Density matrix has negative eigenvalue {lowest:.3e}")
    trace = float(np.trace(rho).real)
    if trace > 1.0 + POLICY.trace_slack or trace <= 0.0:
        raise NumericalIntegrityError(f"Density matrix trace {trace!r} is outside (0, 1]")
