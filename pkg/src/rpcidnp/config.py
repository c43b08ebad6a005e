"""
Configuration management for rpcidnp.

Holds the numerical policy (every tolerance used by the solvers lives here)
and runtime settings discovered from the environment.
"""

import logging
import os
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigurationError


logger = logging.getLogger(__name__)

WORKERS_ENV_VAR = "RPCIDNP_WORKERS"


@dataclass(frozen=True)
class NumericalPolicy:
    """Tolerances and thresholds shared by all solvers."""

    hermiticity_tol: float = 1e-12
    trace_slack: float = 1e-12
    positivity_warn: float = -1e-9
    positivity_error: float = -1e-6
    imaginary_residue_tol: float = 1e-10
    matrix_element_tol: float = 1e-10
    degeneracy_tol: float = 1e-9
    branch_probability_floor: float = 1e-12
    unitarity_tol: float = 1e-12
    step_policy_factor: float = 20.0
    thermal_validity_ratio: float = 0.01

    def max_step(self, *rates: float) -> float:
        """
        Largest time step allowed for the given set of rates and frequencies.

        Args:
            rates: Frequencies (rad/ns) and rates (1/ns) present in the problem

        Returns:
            Maximum admissible step in ns (infinite if every rate is zero)
        """
        fastest = max((abs(r) for r in rates), default=0.0)
        if fastest == 0.0:
            return float("inf")
        return 1.0 / (self.step_policy_factor * fastest)


POLICY = NumericalPolicy()


class RuntimeConfig:
    """Runtime settings for parallel execution."""

    def __init__(self, workers: Optional[int] = None):
        """
        Initialize runtime configuration.

        Args:
            workers: Worker count. If not provided, discovered from the
                RPCIDNP_WORKERS environment variable (default 1).
        """
        self.workers = workers if workers is not None else self._discover_workers()
        if self.workers < 1:
            raise ConfigurationError(f"Worker count must be at least 1, got {self.workers}")

    @staticmethod
    def _discover_workers() -> int:
        """Read the worker count from the environment."""
        raw = os.environ.get(WORKERS_ENV_VAR)
        if raw is None or raw.strip() == "":
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ConfigurationError(
                f"{WORKERS_ENV_VAR} must be a positive integer, got '{raw}'"
            )
        logger.debug(f"Found {WORKERS_ENV_VAR}={workers} in environment")
        return workers

    def __repr__(self) -> str:
        return f"RuntimeConfig(workers={self.workers})"
