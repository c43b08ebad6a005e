"""Deterministic and stochastic time evolution."""

from .deterministic import (
    PeakPolarization,
    ReactionSuperoperatorParams,
    TimeSeries,
    apply_reaction,
    integrate,
    peak_polarization,
)
from .stochastic import (
    RemovalMode,
    TrajectoryConfig,
    TrajectoryEnsembleStats,
    project,
    propagator,
    run_ensemble,
)

__all__ = [
    "PeakPolarization",
    "ReactionSuperoperatorParams",
    "TimeSeries",
    "apply_reaction",
    "integrate",
    "peak_polarization",
    "RemovalMode",
    "TrajectoryConfig",
    "TrajectoryEnsembleStats",
    "project",
    "propagator",
    "run_ensemble",
]
