"""
Classical analog of measurement-induced dephasing: coupled pendulum pairs.

Each system is two identical, linearly coupled oscillators started in the
anti-symmetric mode, so x1 + x2 = 0 for every system. Random kicks reset
pendulum 1 to unit amplitude and stop pendulum 2, which breaks the symmetry.
Systems also disappear at a constant rate, so the ensemble-summed displacement
builds up and then decays with the population.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from ..config import POLICY, RuntimeConfig
from ..errors import ConfigurationError


logger = logging.getLogger(__name__)

PENDULUM_COLUMNS = ("t", "displacement", "surviving")


class KickMode(str, Enum):
    POSITION = "position"
    ENERGY = "energy"


@dataclass(frozen=True)
class PendulumConfig:
    """Ensemble settings in arbitrary time units."""

    omega0: float = 1.0
    coupling: float = 0.2
    kick_rate: float = 0.05
    decay_rate: float = 0.02
    n_systems: int = 10_000
    dt: float = 0.05
    t_end: float = 250.0
    seed: int = 0
    kick_mode: KickMode = KickMode.POSITION
    chunk_size: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "kick_mode", KickMode(self.kick_mode))
        for name in ("omega0", "coupling", "kick_rate", "decay_rate"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.n_systems < 1:
            raise ConfigurationError(f"n_systems must be at least 1, got {self.n_systems}")
        if self.chunk_size < 1:
            raise ConfigurationError(f"chunk_size must be at least 1, got {self.chunk_size}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(f"seed must fit in 64 bits, got {self.seed}")
        if not self.dt > 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        limit = POLICY.max_step(self.omega0, self.coupling, self.kick_rate, self.decay_rate)
        if self.dt > limit * (1 + 1e-12):
            raise ConfigurationError(
                f"Pendulum step {self.dt} exceeds the stability limit {limit:.6g}; use a smaller dt"
            )
        if self.t_end < self.dt:
            raise ConfigurationError(f"t_end ({self.t_end}) must be at least dt ({self.dt})")

    @property
    def n_steps(self) -> int:
        return int(np.floor(self.t_end / self.dt + 1e-9))


@dataclass
class PendulumState:
    """Positions and velocities of a batch of pendulum pairs."""

    x1: np.ndarray
    v1: np.ndarray
    x2: np.ndarray
    v2: np.ndarray

    @classmethod
    def antisymmetric(cls, n: int) -> "PendulumState":
        a = 1.0 / np.sqrt(2.0)
        return cls(np.full(n, a), np.zeros(n), np.full(n, -a), np.zeros(n))

    def displacement(self) -> np.ndarray:
        return self.x1 + self.x2


@dataclass
class PendulumSeries:
    times: np.ndarray
    displacement: np.ndarray
    surviving: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.times, "displacement": self.displacement, "surviving": self.surviving,
        }, columns=list(PENDULUM_COLUMNS))


def _accelerations(state: PendulumState, config: PendulumConfig) -> Tuple[np.ndarray, np.ndarray]:
    w2, c2 = config.omega0 ** 2, config.coupling ** 2
    a1 = -w2 * state.x1 - c2 * (state.x1 - state.x2)
    a2 = -w2 * state.x2 - c2 * (state.x2 - state.x1)
    return a1, a2


def leapfrog_step(state: PendulumState, config: PendulumConfig) -> PendulumState:
    """One velocity-Verlet step of every pair in the batch."""
    dt = config.dt
    a1, a2 = _accelerations(state, config)
    v1 = state.v1 + 0.5 * dt * a1
    v2 = state.v2 + 0.5 * dt * a2
    moved = PendulumState(state.x1 + dt * v1, v1, state.x2 + dt * v2, v2)
    a1, a2 = _accelerations(moved, config)
    moved.v1 = v1 + 0.5 * dt * a1
    moved.v2 = v2 + 0.5 * dt * a2
    return moved


def pendulum_energy(state: PendulumState, config: PendulumConfig) -> np.ndarray:
    """Total mechanical energy per pair (unit masses)."""
    kinetic = 0.5 * (state.v1 ** 2 + state.v2 ** 2)
    potential = 0.5 * config.omega0 ** 2 * (state.x1 ** 2 + state.x2 ** 2)
    spring = 0.5 * config.coupling ** 2 * (state.x1 - state.x2) ** 2
    return kinetic + potential + spring


def apply_kick(state: PendulumState, kicked: np.ndarray, config: PendulumConfig) -> None:
    """
    Reset kicked pairs in place.

    Position kicks set x1 = 1, v1 = 0. Energy kicks rescale pendulum 1 to unit
    amplitude while keeping its phase. Pendulum 2 is stopped in both modes.
    """
    if not np.any(kicked):
        return
    if config.kick_mode is KickMode.POSITION:
        state.x1[kicked] = 1.0
        state.v1[kicked] = 0.0
    else:
        frequency = config.omega0 if config.omega0 > 0 else 1.0
        amplitude = np.hypot(state.x1[kicked], state.v1[kicked] / frequency)
        at_rest = amplitude == 0
        safe = np.where(at_rest, 1.0, amplitude)
        state.x1[kicked] = np.where(at_rest, 1.0, state.x1[kicked] / safe)
        state.v1[kicked] = np.where(at_rest, 0.0, state.v1[kicked] / safe)
    state.x2[kicked] = 0.0
    state.v2[kicked] = 0.0


def _simulate_chunk(config: PendulumConfig, chunk: int, start: int, stop: int) -> Tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed, spawn_key=(chunk,))))
    n = stop - start
    state = PendulumState.antisymmetric(n)
    alive = np.ones(n, dtype=bool)
    p_kick = config.kick_rate * config.dt
    p_decay = config.decay_rate * config.dt

    displacement = np.zeros(config.n_steps + 1)
    surviving = np.zeros(config.n_steps + 1)
    displacement[0] = np.sum(state.displacement())
    surviving[0] = n
    for step in range(1, config.n_steps + 1):
        state = leapfrog_step(state, config)
        draws = rng.random((n, 2))
        apply_kick(state, draws[:, 0] < p_kick, config)
        alive &= ~(draws[:, 1] < p_decay)
        displacement[step] = np.sum(np.where(alive, state.displacement(), 0.0))
        surviving[step] = np.count_nonzero(alive)
    return displacement, surviving


def simulate_pendulums(config: PendulumConfig, workers: Optional[int] = None) -> PendulumSeries:
    """
    Population-weighted ensemble displacement of kicked, decaying pendulum pairs.

    Args:
        config: Ensemble settings
        workers: Thread count (defaults to RuntimeConfig)

    Returns:
        Σ_alive (x1 + x2) / n_systems and the surviving fraction at every step
    """
    chunks = [
        (index, start, min(start + config.chunk_size, config.n_systems))
        for index, start in enumerate(range(0, config.n_systems, config.chunk_size))
    ]
    workers = workers if workers is not None else RuntimeConfig().workers
    logger.debug(f"Simulating {config.n_systems} pendulum pairs for {config.n_steps} steps")

    def run(bounds):
        return _simulate_chunk(config, *bounds)

    if workers == 1:
        partials = [run(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(run, chunks))

    displacement = np.zeros(config.n_steps + 1)
    surviving = np.zeros(config.n_steps + 1)
    for part_displacement, part_surviving in partials:
        displacement += part_displacement
        surviving += part_surviving

    times = np.arange(config.n_steps + 1) * config.dt
    return PendulumSeries(times, displacement / config.n_systems, surviving / config.n_systems)
