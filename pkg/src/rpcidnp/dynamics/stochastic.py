"""
Quantum-trajectory Monte Carlo for measurement-induced dephasing.

Each trajectory is a pure state that evolves unitarily and, at rate r, is
projected onto the singlet or triplet manifold with Born-rule probabilities.
Averaged over trajectories this reproduces the dephasing master equation for
k_S = k_T, which makes it an independent check on the deterministic solver.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from ..config import POLICY, RuntimeConfig
from ..core.spin_algebra import OperatorMatrix, max_abs
from ..core.system_model import ReactionModel, SpinSystemSpec, spin_system
from ..errors import (
    ConfigurationError,
    NumericalIntegrityError,
    UnsupportedConfigurationError,
)
from .deterministic import ReactionSuperoperatorParams, check_step_policy


logger = logging.getLogger(__name__)

MC_COLUMNS = ("t", "mean_iz", "se_iz", "mean_qs", "se_qs", "weight")
RANDOM_BLOCK_STEPS = 256


class RemovalMode(str, Enum):
    ANALYTIC_WEIGHT = "analytic_weight"
    STOCHASTIC_KILL = "stochastic_kill"


@dataclass(frozen=True)
class TrajectoryConfig:
    """Monte-Carlo settings. Times in ns."""

    n_trajectories: int
    master_seed: int
    dt: float
    t_end: float
    removal_mode: RemovalMode = RemovalMode.ANALYTIC_WEIGHT
    sample_every: int = 1
    chunk_size: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "removal_mode", RemovalMode(self.removal_mode))
        if self.n_trajectories < 1:
            raise ConfigurationError(f"n_trajectories must be at least 1, got {self.n_trajectories}")
        if self.chunk_size < 1:
            raise ConfigurationError(f"chunk_size must be at least 1, got {self.chunk_size}")
        if self.sample_every < 1:
            raise ConfigurationError(f"sample_every must be at least 1, got {self.sample_every}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigurationError(f"master_seed must fit in 64 bits, got {self.master_seed}")
        if self.t_end < self.dt:
            raise ConfigurationError(f"t_end ({self.t_end} ns) must be at least dt ({self.dt} ns)")


@dataclass
class TrajectoryEnsembleStats:
    """Population-weighted ensemble means and standard errors per sample."""

    times: np.ndarray
    mean_Iz: np.ndarray
    se_Iz: np.ndarray
    mean_Qs: np.ndarray
    se_Qs: np.ndarray
    surviving_weight: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times, "mean_iz": self.mean_Iz, "se_iz": self.se_Iz,
            "mean_qs": self.mean_Qs, "se_qs": self.se_Qs, "weight": self.surviving_weight,
        }, columns=list(MC_COLUMNS))


def propagator(H: OperatorMatrix, dt: float) -> OperatorMatrix:
    """
    Exact step exp(-iH·dt) for a time-independent Hermitian H.

    Raises:
        NumericalIntegrityError: If diagonalization fails or U is not unitary
    """
    try:
        energies, vectors = linalg.eigh(H)
    except linalg.LinAlgError as e:
        raise NumericalIntegrityError(f"Eigendecomposition of H failed: {e}")
    U = (vectors * np.exp(-1j * energies * dt)) @ vectors.conj().T
    defect = max_abs(U @ U.conj().T - np.eye(H.shape[0]))
    if defect > POLICY.unitarity_tol:
        raise NumericalIntegrityError(f"Propagator is not unitary (defect {defect:.3e})")
    return U


def singlet_basis(spec: SpinSystemSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigenvectors of ρ0 with non-zero weight and their eigenweights.

    Returns:
        (states, weights): states[j] = |S⟩ ⊗ |m_j⟩, weights all 1/M
    """
    singlet = np.array([0.0, 1.0, -1.0, 0.0], dtype=np.complex128) / np.sqrt(2)
    M = spec.multiplicity
    states = np.stack([np.kron(singlet, np.eye(M)[j]) for j in range(M)])
    return states, np.full(M, 1.0 / M)


def project(states: np.ndarray, q_s: OperatorMatrix, u_outcome: np.ndarray) -> np.ndarray:
    """
    Singlet/triplet projection of a batch of pure states.

    Row i goes to Q_S|ψ_i⟩ (renormalized) when u_outcome[i] < ⟨ψ_i|Q_S|ψ_i⟩,
    otherwise to Q_T|ψ_i⟩. A branch with probability below the policy floor
    is never taken.

    Args:
        states: (n, dim) array of unit vectors
        q_s: Singlet projector
        u_outcome: (n,) uniforms in [0, 1)

    Returns:
        (n, dim) array of projected unit vectors
    """
    singlet_part = states @ q_s.T
    triplet_part = states - singlet_part
    p_s = np.clip(np.einsum("ij,ij->i", singlet_part.conj(), singlet_part).real, 0.0, 1.0)
    p_t = np.clip(np.einsum("ij,ij->i", triplet_part.conj(), triplet_part).real, 0.0, 1.0)
    to_singlet = u_outcome < p_s / (p_s + p_t)
    floor = POLICY.branch_probability_floor
    to_singlet = np.where(p_s < floor, False, to_singlet)
    to_singlet = np.where(p_t < floor, True, to_singlet)
    chosen = np.where(to_singlet[:, None], singlet_part, triplet_part)
    norm = np.sqrt(np.where(to_singlet, p_s, p_t))
    return chosen / norm[:, None]


@dataclass(frozen=True)
class _ChunkSums:
    iz: np.ndarray
    iz_sq: np.ndarray
    qs: np.ndarray
    qs_sq: np.ndarray
    alive: np.ndarray


class _EnsembleRunner:
    """Shared, read-only inputs for simulating chunks of trajectories."""

    def __init__(self, spec: SpinSystemSpec, config: TrajectoryConfig, rate: float, k: float):
        self.spec = spec
        self.config = config
        self.rate = rate
        self.k = k
        system = spin_system(spec)
        self.U_T = propagator(system.hamiltonian, config.dt).T
        self.Q_S = system.Q_S
        self.Q_S_T = system.Q_S.T
        self.I_z_T = system.I_z.T
        self.initial_states, weights = singlet_basis(spec)
        self.cumulative = np.cumsum(weights)
        self.n_steps = int(np.floor(config.t_end / config.dt + 1e-9))
        self.sample_steps = np.arange(0, self.n_steps + 1, config.sample_every)

    def _generators(self, start: int, stop: int) -> List[np.random.Generator]:
        seed = self.config.master_seed
        return [
            np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(i,))))
            for i in range(start, stop)
        ]

    def _sample(self, psi: np.ndarray, alive: np.ndarray, out: _ChunkSums, index: int) -> None:
        norms = np.einsum("ij,ij->i", psi.conj(), psi).real
        if np.any(np.abs(norms - 1.0) > 1e-10):
            raise NumericalIntegrityError(
                f"Trajectory norm drifted to {norms.min():.12f}..{norms.max():.12f}",
                time=index * self.config.sample_every * self.config.dt,
            )
        iz = np.einsum("ij,ij->i", psi.conj(), psi @ self.I_z_T).real
        qs = np.einsum("ij,ij->i", psi.conj(), psi @ self.Q_S_T).real
        a = alive.astype(float)
        out.iz[index] = np.sum(a * iz)
        out.iz_sq[index] = np.sum(a * iz ** 2)
        out.qs[index] = np.sum(a * qs)
        out.qs_sq[index] = np.sum(a * qs ** 2)
        out.alive[index] = np.sum(a)

    def run_chunk(self, bounds: Tuple[int, int]) -> _ChunkSums:
        start, stop = bounds
        n = stop - start
        n_samples = len(self.sample_steps)
        sums = _ChunkSums(*(np.zeros(n_samples) for _ in range(5)))
        generators = self._generators(start, stop)

        picks = np.array([g.random() for g in generators])
        which = np.minimum(np.searchsorted(self.cumulative, picks * self.cumulative[-1], side="right"),
                           len(self.cumulative) - 1)
        psi = self.initial_states[which].copy()
        alive = np.ones(n, dtype=bool)
        kill = self.config.removal_mode is RemovalMode.STOCHASTIC_KILL
        p_event = self.rate * self.config.dt
        p_kill = self.k * self.config.dt

        self._sample(psi, alive, sums, 0)
        sample_index = 1
        step = 0
        while step < self.n_steps:
            block = min(RANDOM_BLOCK_STEPS, self.n_steps - step)
            draws = np.stack([g.random((block, 3)) for g in generators])
            for b in range(block):
                step += 1
                psi = psi @ self.U_T
                events = draws[:, b, 0] < p_event
                if np.any(events):
                    psi[events] = project(psi[events], self.Q_S, draws[events, b, 1])
                if kill:
                    alive &= ~(draws[:, b, 2] < p_kill)
                if sample_index < n_samples and step == self.sample_steps[sample_index]:
                    self._sample(psi, alive, sums, sample_index)
                    sample_index += 1
        return sums


def run_ensemble(spec: SpinSystemSpec, config: TrajectoryConfig,
                 workers: Optional[int] = None) -> TrajectoryEnsembleStats:
    """
    Monte-Carlo estimate of ⟨I_z⟩(t) and ⟨Q_S⟩(t) by trajectory unraveling.

    Args:
        spec: kominis or custom_dephasing system with k_S = k_T
        config: Trajectory settings
        workers: Thread count (defaults to RuntimeConfig)

    Returns:
        Population-weighted ensemble statistics on the sample grid

    Raises:
        UnsupportedConfigurationError: For other models or k_S != k_T
    """
    if spec.reaction_model not in (ReactionModel.KOMINIS, ReactionModel.CUSTOM_DEPHASING):
        raise UnsupportedConfigurationError(
            f"Trajectory unraveling supports kominis and custom_dephasing, "
            f"not {spec.reaction_model.value}"
        )
    if spec.k_singlet != spec.k_triplet:
        raise UnsupportedConfigurationError(
            f"Trajectory unraveling requires k_S = k_T, got {spec.k_singlet} and {spec.k_triplet}"
        )
    params = ReactionSuperoperatorParams.from_spec(spec)
    check_step_policy(config.dt, spec.max_coupling(), spec.larmor_omega, params.k_S, params.eta)

    runner = _EnsembleRunner(spec, config, rate=params.eta, k=params.k_S)
    chunks = [
        (start, min(start + config.chunk_size, config.n_trajectories))
        for start in range(0, config.n_trajectories, config.chunk_size)
    ]
    workers = workers if workers is not None else RuntimeConfig().workers
    logger.debug(
        f"Running {config.n_trajectories} trajectories in {len(chunks)} chunks "
        f"on {workers} workers"
    )
    if workers == 1:
        partials = [runner.run_chunk(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(runner.run_chunk, chunks))

    totals = partials[0]
    for part in partials[1:]:
        totals = _ChunkSums(*(a + b for a, b in zip(
            (totals.iz, totals.iz_sq, totals.qs, totals.qs_sq, totals.alive),
            (part.iz, part.iz_sq, part.qs, part.qs_sq, part.alive),
        )))

    N = config.n_trajectories
    times = runner.sample_steps * config.dt
    if config.removal_mode is RemovalMode.ANALYTIC_WEIGHT:
        weight = np.exp(-params.k_S * times)
    else:
        weight = totals.alive / N

    def moments(total: np.ndarray, total_sq: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        mean = total / N
        if N < 2:
            return mean, np.zeros_like(mean)
        variance = np.maximum(total_sq - N * mean ** 2, 0.0) / (N - 1)
        return mean, np.sqrt(variance / N)

    mean_iz, se_iz = moments(totals.iz, totals.iz_sq)
    mean_qs, se_qs = moments(totals.qs, totals.qs_sq)
    if config.removal_mode is RemovalMode.ANALYTIC_WEIGHT:
        mean_iz, se_iz = weight * mean_iz, weight * se_iz
        mean_qs, se_qs = weight * mean_qs, weight * se_qs

    return TrajectoryEnsembleStats(times, mean_iz, se_iz, mean_qs, se_qs, weight)
