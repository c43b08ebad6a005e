"""
Density-matrix master equation integrator.

dρ/dt = -i[H, ρ] + L(ρ), where L is the reaction superoperator

    L(ρ) = -k_S Q_S ρ Q_S - k_T Q_T ρ Q_T - ((k_S + k_T)/2 + eta)(Q_S ρ Q_T + Q_T ρ Q_S)

With eta = 0 this is the Haberkorn form; the measurement-based models add
extra singlet-triplet dephasing through eta.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
import pandas as pd

from ..config import POLICY
from ..core.spin_algebra import DensityMatrix, expectation, hermitize, min_eigenvalue
from ..core.system_model import ReactionModel, SpinSystemSpec, reference_system, spin_system
from ..errors import ConfigurationError, NumericalIntegrityError, UsageError
from ..observables.estimates import iz_proj


logger = logging.getLogger(__name__)

SERIES_COLUMNS = ("t", "trace", "qs", "iz", "iz_norm", "izS", "izT", "jz", "iz_proj")


@dataclass(frozen=True)
class ReactionSuperoperatorParams:
    """Rates of the reaction superoperator, all in 1/ns."""

    k_S: float
    k_T: float
    eta: float = 0.0

    @classmethod
    def from_spec(cls, spec: SpinSystemSpec) -> "ReactionSuperoperatorParams":
        """Rates implied by the spec's reaction model."""
        k_S, k_T = spec.k_singlet, spec.k_triplet
        model = spec.reaction_model
        if model is ReactionModel.HAMILTONIAN_ONLY:
            return cls(0.0, 0.0, 0.0)
        if model is ReactionModel.HABERKORN:
            eta = 0.0
        elif model is ReactionModel.KOMINIS:
            eta = (k_S + k_T) / 2
        elif model is ReactionModel.JONES_HORE:
            eta = k_S + k_T
        else:
            eta = float(spec.eta)
        return cls(k_S, k_T, eta)

    @property
    def coherence_rate(self) -> float:
        """Total decay rate of singlet-triplet coherences."""
        return (self.k_S + self.k_T) / 2 + self.eta


def apply_reaction(params: ReactionSuperoperatorParams, rho: DensityMatrix) -> np.ndarray:
    """
    Evaluate the reaction superoperator L(ρ).

    Args:
        params: Recombination and dephasing rates
        rho: Density matrix on a two-electron, N-nucleus space

    Returns:
        The matrix-valued rate L(ρ)
    """
    system = reference_system(rho.shape[0])
    return _reaction(params, rho, system.Q_S)


def _reaction(params: ReactionSuperoperatorParams, rho: np.ndarray, q_s: np.ndarray) -> np.ndarray:
    left = q_s @ rho
    ss = left @ q_s
    st = left - ss
    ts = rho @ q_s - ss
    tt = rho - ss - st - ts
    return -params.k_S * ss - params.k_T * tt - params.coherence_rate * (st + ts)


@dataclass
class TimeSeries:
    """Sampled observables of one integration run (unnormalized unless noted)."""

    times: np.ndarray
    trace: np.ndarray
    qs: np.ndarray
    iz: np.ndarray
    iz_norm: np.ndarray
    izS: np.ndarray
    izT: np.ndarray
    jz: np.ndarray
    iz_proj: np.ndarray

    def __post_init__(self):
        columns = self.columns()
        lengths = {name: len(values) for name, values in columns.items()}
        if len(set(lengths.values())) > 1:
            raise UsageError(f"TimeSeries columns have unequal lengths: {lengths}")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise UsageError("TimeSeries times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def columns(self) -> Dict[str, np.ndarray]:
        """Arrays keyed by CSV column name."""
        return {
            "t": self.times, "trace": self.trace, "qs": self.qs, "iz": self.iz,
            "iz_norm": self.iz_norm, "izS": self.izS, "izT": self.izT,
            "jz": self.jz, "iz_proj": self.iz_proj,
        }

    def to_frame(self, emit_normalized: bool = True) -> pd.DataFrame:
        """Tabular form with the CSV column names."""
        frame = pd.DataFrame(self.columns(), columns=list(SERIES_COLUMNS))
        if not emit_normalized:
            frame = frame.drop(columns=["iz_norm"])
        return frame

    def singlet_yield(self, k_singlet: float) -> np.ndarray:
        """Cumulative singlet product yield k_S ∫ ⟨Q_S⟩ dt (trapezoid rule)."""
        if len(self) < 2:
            return np.zeros(len(self))
        increments = 0.5 * (self.qs[1:] + self.qs[:-1]) * np.diff(self.times)
        return k_singlet * np.concatenate(([0.0], np.cumsum(increments)))


@dataclass(frozen=True)
class PeakPolarization:
    t_peak: float
    value: float


def check_step_policy(dt: float, *rates: float) -> None:
    """Raise ConfigurationError if dt is too large for the fastest rate."""
    if not dt > 0:
        raise ConfigurationError(f"Time step must be positive, got {dt}")
    limit = POLICY.max_step(*rates)
    if dt > limit * (1 + 1e-12):
        raise ConfigurationError(
            f"Time step {dt} ns exceeds the stability limit {limit:.6g} ns "
            f"(1/({POLICY.step_policy_factor:g}·max rate)); use a smaller dt"
        )


class MasterEquation:
    """Right-hand side of the master equation for one spec."""

    def __init__(self, spec: SpinSystemSpec):
        self.spec = spec
        self.system = spin_system(spec)
        self.params = ReactionSuperoperatorParams.from_spec(spec)

    def fastest_rate(self) -> tuple:
        p = self.params
        return (self.spec.max_coupling(), self.spec.larmor_omega, p.k_S, p.k_T, p.eta)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        H = self.system.hamiltonian
        return -1j * (H @ rho - rho @ H) + _reaction(self.params, rho, self.system.Q_S)

    def rk4_step(self, rho: np.ndarray, dt: float) -> np.ndarray:
        k1 = self(rho)
        k2 = self(rho + 0.5 * dt * k1)
        k3 = self(rho + 0.5 * dt * k2)
        k4 = self(rho + dt * k3)
        return hermitize(rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def _observables(system, rho: np.ndarray) -> Dict[str, float]:
    trace = float(np.trace(rho).real)
    iz = expectation(rho, system.I_z)
    izS = expectation(system.Q_S @ rho @ system.Q_S, system.I_z)
    izT = expectation(system.Q_T @ rho @ system.Q_T, system.I_z)
    return {
        "trace": trace,
        "qs": expectation(rho, system.Q_S),
        "iz": iz,
        "iz_norm": iz / trace if trace > 0 else 0.0,
        "izS": izS,
        "izT": izT,
        "jz": expectation(rho, system.J_z),
        "iz_proj": iz_proj(rho) if trace > 0 else 0.0,
    }


def integrate(spec: SpinSystemSpec, t_end: float, dt: float, sample_every: int = 1,
              rho0: Optional[DensityMatrix] = None) -> TimeSeries:
    """
    Integrate the master equation with fixed-step 4th-order Runge-Kutta.

    Args:
        spec: System description
        t_end: Final time in ns
        dt: Step in ns, at most 1/(20·max(|A|, ω, k_S, k_T, eta))
        sample_every: Record observables every this many steps
        rho0: Initial state (defaults to the normalized singlet state)

    Returns:
        TimeSeries sampled at t = 0, sample_every·dt, ...

    Raises:
        ConfigurationError: If the step policy is violated or rho0 has the wrong shape
        NumericalIntegrityError: If the state loses positivity
    """
    equation = MasterEquation(spec)
    check_step_policy(dt, *equation.fastest_rate())
    if t_end < dt:
        raise ConfigurationError(f"t_end ({t_end} ns) must be at least dt ({dt} ns)")
    if sample_every < 1:
        raise ConfigurationError(f"sample_every must be a positive integer, got {sample_every}")

    if rho0 is not None and np.shape(rho0) != (spec.dim, spec.dim):
        raise ConfigurationError(
            f"Initial state has shape {np.shape(rho0)}, expected ({spec.dim}, {spec.dim}) for {spec.n_nuclei} nuclei"
        )

    n_steps = int(np.floor(t_end / dt + 1e-9))
    rho = np.array(equation.system.initial_state() if rho0 is None else rho0, dtype=np.complex128)
    logger.debug(
        f"Integrating {spec.reaction_model.value}: {n_steps} steps of {dt} ns, "
        f"eta={equation.params.eta}"
    )

    samples = {name: [] for name in SERIES_COLUMNS}
    warned = False
    for step in range(n_steps + 1):
        if step > 0:
            rho = equation.rk4_step(rho, dt)
        if step % sample_every:
            continue
        t = step * dt
        lowest = min_eigenvalue(rho)
        if lowest < POLICY.positivity_error:
            raise NumericalIntegrityError(
                f"Density matrix lost positivity at t = {t:.6g} ns "
                f"(min eigenvalue {lowest:.3e}); reduce dt",
                time=t,
            )
        if lowest < POLICY.positivity_warn and not warned:
            logger.warning(f"Small negative eigenvalue {lowest:.3e} at t = {t:.6g} ns")
            warned = True
        samples["t"].append(t)
        for name, value in _observables(equation.system, rho).items():
            samples[name].append(value)

    arrays = {name: np.asarray(values, dtype=float) for name, values in samples.items()}
    return TimeSeries(
        times=arrays["t"], trace=arrays["trace"], qs=arrays["qs"], iz=arrays["iz"],
        iz_norm=arrays["iz_norm"], izS=arrays["izS"], izT=arrays["izT"],
        jz=arrays["jz"], iz_proj=arrays["iz_proj"],
    )


def peak_polarization(series: TimeSeries) -> PeakPolarization:
    """
    Sample of maximum |⟨I_z⟩| (earliest one on ties).

    Raises:
        UsageError: If the series is empty
    """
    if len(series) == 0:
        raise UsageError("Cannot take the peak of an empty series")
    index = int(np.argmax(np.abs(series.iz)))
    return PeakPolarization(float(series.times[index]), float(series.iz[index]))
