"""Physical constants and unit conversions (single source of truth)."""

from dataclasses import dataclass, field

import numpy as np
from scipy import constants as codata


@dataclass(frozen=True)
class PhysicalConstants:
    """
    Constants used by the closed-form estimates.

    gamma_e is the electron gyromagnetic ratio in rad/ns per Gauss
    (2π × 2.8 MHz/G); gamma_ratio is |μ_e/μ_p|. The SI values come from
    scipy.constants.
    """

    gamma_e: float = 2 * np.pi * 2.8e-3
    gamma_ratio: float = 658.5
    mu_p: float = field(default_factory=lambda: codata.physical_constants["proton mag. mom."][0])
    mu_0: float = codata.mu_0
    k_B: float = codata.k
    hbar: float = codata.hbar
    avogadro: float = codata.N_A

    def __post_init__(self):
        for name in ("gamma_e", "gamma_ratio", "mu_p", "mu_0", "k_B", "hbar", "avogadro"):
            if not getattr(self, name) > 0:
                raise ValueError(f"Physical constant {name} must be positive")

    def larmor_from_field(self, field_G: float) -> float:
        """Electron Larmor frequency in rad/ns for a field in Gauss."""
        return self.gamma_e * field_G

    def field_from_larmor(self, omega: float) -> float:
        """Field in Gauss for an electron Larmor frequency in rad/ns."""
        return omega / self.gamma_e


CONSTANTS = PhysicalConstants()

NS_PER_S = 1e9
LITERS_PER_M3 = 1e3
