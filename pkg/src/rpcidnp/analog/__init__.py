"""Classical analog of singlet-triplet dephasing."""

from .pendulum import KickMode, PendulumConfig, PendulumSeries, simulate_pendulums

__all__ = ["KickMode", "PendulumConfig", "PendulumSeries", "simulate_pendulums"]
