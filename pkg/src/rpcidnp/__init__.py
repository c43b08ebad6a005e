"""
rpcidnp - Radical-pair spin dynamics and quantum-measurement CIDNP.

Main entry points:
    SpinSystemSpec.single_nucleus(A, omega, model, k) - Describe a radical pair
    integrate(spec, t_end, dt) - Master-equation time series
    run_ensemble(spec, TrajectoryConfig(...)) - Quantum-trajectory Monte Carlo
    simulate_pendulums(PendulumConfig()) - Classical dephasing analog
    from rpcidnp.observables import thermal_polarization, enhancement_factor
    rpcidnp simulate fig4 - Command line (see rpcidnp.cli)
"""

from .config import POLICY, NumericalPolicy, RuntimeConfig
from .core import Nucleus, ReactionModel, SpinSystem, SpinSystemSpec
from .dynamics import TimeSeries, TrajectoryConfig, integrate, peak_polarization, run_ensemble
from .analog import PendulumConfig, simulate_pendulums
from .errors import (
    ConfigurationError,
    NumericalIntegrityError,
    ObservableRangeError,
    RpcidnpError,
    ScenarioParseError,
    UnsupportedConfigurationError,
    UsageError,
)


__version__ = "0.1.0"


__all__ = [
    "POLICY",
    "NumericalPolicy",
    "RuntimeConfig",
    "Nucleus",
    "ReactionModel",
    "SpinSystem",
    "SpinSystemSpec",
    "TimeSeries",
    "TrajectoryConfig",
    "integrate",
    "peak_polarization",
    "run_ensemble",
    "PendulumConfig",
    "simulate_pendulums",
    "RpcidnpError",
    "ConfigurationError",
    "UnsupportedConfigurationError",
    "UsageError",
    "ObservableRangeError",
    "NumericalIntegrityError",
    "ScenarioParseError",
]
