"""
Radical-pair system description, Hamiltonian and initial state.

A SpinSystemSpec is a declarative, hashable record. SpinSystem builds and
caches every operator the solvers need for one spec.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg

from ..config import POLICY
from ..errors import ConfigurationError, NumericalIntegrityError
from .spin_algebra import (
    DensityMatrix,
    OperatorMatrix,
    commutator,
    electron_nuclear_layout,
    expectation,
    identity,
    singlet_projector,
    spin_vector,
)


logger = logging.getLogger(__name__)

MAX_NUCLEI = 4


class ReactionModel(str, Enum):
    """Reaction superoperator families."""

    HAMILTONIAN_ONLY = "hamiltonian_only"
    HABERKORN = "haberkorn"
    KOMINIS = "kominis"
    JONES_HORE = "jones_hore"
    CUSTOM_DEPHASING = "custom_dephasing"

    @classmethod
    def parse(cls, name: str) -> "ReactionModel":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ConfigurationError(f"Unknown reaction model '{name}'. Valid models: {valid}")


@dataclass(frozen=True)
class Nucleus:
    """A spin-1/2 nucleus isotropically coupled to one of the two electrons."""

    coupling_A: float
    attached_electron: int = 1

    def __post_init__(self):
        if self.attached_electron not in (1, 2):
            raise ConfigurationError(
                f"attached_electron must be 1 or 2, got {self.attached_electron}"
            )
        if not np.isfinite(self.coupling_A):
            raise ConfigurationError(f"Hyperfine coupling must be finite, got {self.coupling_A}")


@dataclass(frozen=True)
class SpinSystemSpec:
    """
    Declarative description of a radical pair.

    Frequencies are in rad/ns and rates in 1/ns.
    """

    nuclei: Tuple[Nucleus, ...] = ()
    larmor_omega: float = 0.0
    k_singlet: float = 0.0
    k_triplet: float = 0.0
    reaction_model: ReactionModel = ReactionModel.HAMILTONIAN_ONLY
    eta: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "nuclei", tuple(self.nuclei))
        object.__setattr__(self, "reaction_model", ReactionModel.parse(self.reaction_model))
        if len(self.nuclei) > MAX_NUCLEI:
            raise ConfigurationError(
                f"At most {MAX_NUCLEI} nuclei are supported, got {len(self.nuclei)}"
            )
        if self.k_singlet < 0 or self.k_triplet < 0:
            raise ConfigurationError(
                f"Recombination rates must be non-negative, got k_S={self.k_singlet}, "
                f"k_T={self.k_triplet}"
            )
        if (self.reaction_model is ReactionModel.HAMILTONIAN_ONLY
                and (self.k_singlet != 0 or self.k_triplet != 0)):
            raise ConfigurationError("hamiltonian_only requires k_S = k_T = 0")
        if self.reaction_model is ReactionModel.CUSTOM_DEPHASING:
            if self.eta is None or self.eta < 0:
                raise ConfigurationError(
                    f"custom_dephasing requires a non-negative eta, got {self.eta}"
                )
        elif self.eta is not None:
            raise ConfigurationError(
                f"eta is only accepted for custom_dephasing, not {self.reaction_model.value}"
            )

    @classmethod
    def single_nucleus(cls, A: float, omega: float, model: str = "hamiltonian_only",
                       k: float = 0.0, eta: Optional[float] = None) -> "SpinSystemSpec":
        """One nucleus on electron 1 with k_S = k_T = k."""
        return cls(
            nuclei=(Nucleus(A, 1),),
            larmor_omega=omega,
            k_singlet=k,
            k_triplet=k,
            reaction_model=ReactionModel.parse(model) if isinstance(model, str) else model,
            eta=eta,
        )

    @property
    def n_nuclei(self) -> int:
        return len(self.nuclei)

    @property
    def multiplicity(self) -> int:
        """Nuclear spin multiplicity M = 2^N."""
        return 2 ** self.n_nuclei

    @property
    def dim(self) -> int:
        return 4 * self.multiplicity

    @property
    def layout(self) -> Tuple[int, ...]:
        return electron_nuclear_layout(self.n_nuclei)

    def max_coupling(self) -> float:
        return max((abs(n.coupling_A) for n in self.nuclei), default=0.0)


class SpinSystem:
    """All operators for one SpinSystemSpec, built once."""

    def __init__(self, spec: SpinSystemSpec):
        self.spec = spec
        layout = spec.layout
        self.s1 = spin_vector(0, layout)
        self.s2 = spin_vector(1, layout)
        self.nuclear_spins = [spin_vector(2 + i, layout) for i in range(spec.n_nuclei)]
        self.identity = identity(layout)
        self.Q_S = singlet_projector(layout)
        self.Q_T = self.identity - self.Q_S

        dim = spec.dim
        self.I_z = sum((spins[2] for spins in self.nuclear_spins), np.zeros((dim, dim), complex))
        self.J_z = self.s1[2] + self.s2[2] + self.I_z
        self.hamiltonian = self._build_hamiltonian()
        for op in (self.Q_T, self.I_z, self.J_z, self.hamiltonian):
            op.setflags(write=False)

        logger.debug(f"Built spin system: {spec.n_nuclei} nuclei, dim {dim}")

    def _build_hamiltonian(self) -> OperatorMatrix:
        spec = self.spec
        H = spec.larmor_omega * (self.s1[2] + self.s2[2])
        for nucleus, spins in zip(spec.nuclei, self.nuclear_spins):
            electron = self.s1 if nucleus.attached_electron == 1 else self.s2
            H = H + nucleus.coupling_A * sum(i_c @ s_c for i_c, s_c in zip(spins, electron))
        return np.asarray(H, dtype=np.complex128)

    def nuclear_z(self, index: int) -> OperatorMatrix:
        """I_z of a single nucleus (0-based declaration order)."""
        return self.nuclear_spins[index][2]

    def initial_state(self) -> DensityMatrix:
        rho = self.Q_S / np.trace(self.Q_S).real
        rho.setflags(write=False)
        return rho

    def iz_heisenberg_rate(self, rho: DensityMatrix) -> float:
        """d<I_z>/dt under the Hamiltonian alone, i·Tr(rho [H, I_z])."""
        return expectation(rho, 1j * commutator(self.hamiltonian, self.I_z))

    def __repr__(self) -> str:
        return f"SpinSystem(nuclei={self.spec.n_nuclei}, dim={self.spec.dim})"


@lru_cache(maxsize=64)
def spin_system(spec: SpinSystemSpec) -> SpinSystem:
    """Cached SpinSystem for a spec."""
    return SpinSystem(spec)


def build_hamiltonian(spec: SpinSystemSpec) -> OperatorMatrix:
    """
    H = sum_i A_i I_i·s_(e_i) + omega (s1z + s2z).

    Args:
        spec: System description

    Returns:
        Hermitian operator of dimension 4·2^N
    """
    return spin_system(spec).hamiltonian


def initial_state(spec: SpinSystemSpec) -> DensityMatrix:
    """Normalized singlet state rho_0 = Q_S / Tr(Q_S)."""
    return spin_system(spec).initial_state()


@dataclass(frozen=True)
class SpectralLine:
    """One singlet-triplet coherence of the Hamiltonian."""

    m: int
    n: int
    freq: float
    weight: float


def _eigen_clusters(energies: np.ndarray) -> List[np.ndarray]:
    scale = max(1.0, float(np.max(np.abs(energies)))) if energies.size else 1.0
    tol = POLICY.degeneracy_tol * scale
    clusters, start = [], 0
    for i in range(1, len(energies) + 1):
        if i == len(energies) or energies[i] - energies[i - 1] > tol:
            clusters.append(np.arange(start, i))
            start = i
    return clusters


def st_spectrum_analysis(spec: SpinSystemSpec) -> List[SpectralLine]:
    """
    Frequencies at which Q_S matrix elements oscillate in the eigenbasis of H.

    Degenerate eigenvalues are grouped into clusters; m and n index clusters in
    ascending energy order and the weight is the Frobenius norm of the Q_S
    block between them, which does not depend on the choice of basis inside
    a degenerate eigenspace.

    Args:
        spec: System description

    Returns:
        Lines with weight above threshold, both (m, n) and (n, m), sorted by
        descending weight
    """
    system = spin_system(spec)
    try:
        energies, vectors = linalg.eigh(system.hamiltonian)
    except linalg.LinAlgError as e:
        raise NumericalIntegrityError(f"Hamiltonian diagonalization failed: {e}")

    q_eigen = vectors.conj().T @ system.Q_S @ vectors
    clusters = _eigen_clusters(energies)
    centres = [float(np.mean(energies[c])) for c in clusters]

    lines = []
    for m, rows in enumerate(clusters):
        for n, cols in enumerate(clusters):
            if m == n:
                continue
            weight = float(np.linalg.norm(q_eigen[np.ix_(rows, cols)]))
            if weight > POLICY.matrix_element_tol:
                lines.append(SpectralLine(m, n, centres[m] - centres[n], weight))

    lines.sort(key=lambda line: (-round(line.weight, 12), line.m, line.n))
    return lines


def spectrum(spec: SpinSystemSpec) -> np.ndarray:
    """Sorted eigenvalues of H."""
    return linalg.eigvalsh(build_hamiltonian(spec))


def negated_couplings(spec: SpinSystemSpec) -> SpinSystemSpec:
    """Same spec with every hyperfine coupling A_i -> -A_i."""
    return replace(spec, nuclei=tuple(Nucleus(-n.coupling_A, n.attached_electron) for n in spec.nuclei))


def reference_system(dim: int) -> SpinSystem:
    """
    Coupling-free SpinSystem of the given dimension.

    Used where only H-independent operators (Q_S, Q_T, I_z, J_z) are needed
    for a bare density matrix.
    """
    n_nuclei = int(round(np.log2(dim / 4))) if dim >= 4 else -1
    if n_nuclei < 0 or 4 * 2 ** n_nuclei != dim or n_nuclei > MAX_NUCLEI:
        raise ConfigurationError(f"Dimension {dim} is not 4·2^N for 0 <= N <= {MAX_NUCLEI}")
    return spin_system(SpinSystemSpec(nuclei=(Nucleus(0.0),) * n_nuclei))
