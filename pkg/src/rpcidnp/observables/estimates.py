"""
Closed-form estimates of quantum-measurement CIDNP and derived quantities.

Rates and frequencies are in rad/ns or 1/ns unless a docstring says otherwise;
conversions to Gauss and SI go through PhysicalConstants.
"""

import logging
from typing import TYPE_CHECKING, Optional

import numpy as np

from ..config import POLICY
from ..core.spin_algebra import DensityMatrix, expectation
from ..core.system_model import reference_system
from ..errors import NumericalIntegrityError, ObservableRangeError, UsageError
from .constants import CONSTANTS, LITERS_PER_M3, NS_PER_S, PhysicalConstants

if TYPE_CHECKING:
    from ..dynamics.deterministic import TimeSeries


logger = logging.getLogger(__name__)

DEFAULT_TEMPERATURE_K = 300.0


def _require_positive_rate(k: float) -> None:
    if not k > 0:
        raise UsageError(f"Recombination rate k must be positive, got {k}")


def iz_proj(rho: DensityMatrix) -> float:
    """
    Nuclear polarization carried by singlet/triplet projections.

    ⟨I_z⟩^proj = ⟨Q_S⟩⟨I_z⟩^S + ⟨Q_T⟩⟨I_z⟩^T on the normalized state, with
    ⟨I_z⟩^S = ⟨Q_S I_z Q_S⟩ and ⟨I_z⟩^T = ⟨Q_T I_z Q_T⟩.

    Raises:
        UsageError: If rho has zero trace
        NumericalIntegrityError: If the reduced form ⟨I_z⟩^S(2⟨Q_S⟩ - 1)
            disagrees while the sorting condition ⟨I_z⟩^T = -⟨I_z⟩^S holds
    """
    trace = float(np.trace(rho).real)
    if trace <= 0:
        raise UsageError("Cannot normalize a density matrix with zero trace")
    system = reference_system(rho.shape[0])
    state = rho / trace
    qs = expectation(state, system.Q_S)
    qt = expectation(state, system.Q_T)
    izS = expectation(system.Q_S @ state @ system.Q_S, system.I_z)
    izT = expectation(system.Q_T @ state @ system.Q_T, system.I_z)
    value = qs * izS + qt * izT

    imbalance = abs(izS + izT)
    if imbalance <= 1e-10:
        reduced = izS * (2 * qs - 1)
        if abs(value - reduced) > 1e-12 + imbalance:
            raise NumericalIntegrityError(
                f"Projected polarization forms disagree: {value!r} vs {reduced!r}"
            )
    return value


def estimate_izS(omega: float, A: float, k: float) -> float:
    """Singlet-manifold nuclear polarization at t ≈ 1/k, -ωA/k²."""
    _require_positive_rate(k)
    return -omega * A / k ** 2


def estimate_izqc(omega: float, Omega: float, A: float, k: float) -> float:
    """Measurement-induced nuclear polarization, ωΩ²A/k⁴."""
    _require_positive_rate(k)
    return omega * Omega ** 2 * A / k ** 4


def thermal_polarization(B: float, T: float = DEFAULT_TEMPERATURE_K,
                         constants: PhysicalConstants = CONSTANTS) -> float:
    """
    Thermal proton polarization ħγ_eB / (4γk_BT).

    Args:
        B: Field in Gauss
        T: Temperature in Kelvin

    Returns:
        Dimensionless polarization

    Raises:
        UsageError: If T <= 0 or B < 0
    """
    if not T > 0:
        raise UsageError(f"Temperature must be positive, got {T} K")
    if B < 0:
        raise UsageError(f"Field must be non-negative, got {B} G")
    omega_si = constants.larmor_from_field(B) * NS_PER_S
    energy = constants.hbar * omega_si
    thermal_energy = constants.gamma_ratio * constants.k_B * T
    if energy / thermal_energy > POLICY.thermal_validity_ratio:
        logger.warning(
            f"High-temperature expansion is inaccurate at B={B} G, T={T} K "
            f"(ħω/γk_BT = {energy / thermal_energy:.3g})"
        )
    return energy / (4 * thermal_energy)


def enhancement_factor(Omega: float, A: float, k: float) -> float:
    """
    Enhancement of the measurement-induced polarization over thermal.

    10³ (Ω/0.01 ns⁻¹)² (A/0.1 ns⁻¹) / (k/1 ns⁻¹)⁴, independent of ω.
    """
    _require_positive_rate(k)
    return 1e3 * (Omega / 0.01) ** 2 * (A / 0.1) / k ** 4


def field_window(k: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """Upper field (Gauss) of the low-field window, k/γ_e."""
    _require_positive_rate(k)
    return constants.field_from_larmor(k)


def sample_field(P: float, conc_RC: float, constants: PhysicalConstants = CONSTANTS) -> float:
    """
    Magnetic field (Tesla) of polarized nuclei, P·μ_p·μ_0·n.

    Args:
        P: Nuclear polarization (any enhancement already applied)
        conc_RC: Reaction-center concentration in mol/L, one proton each

    Returns:
        Field in Tesla, without the order-unity geometry factor
    """
    if P < 0 or conc_RC < 0:
        raise UsageError(f"Polarization and concentration must be non-negative, got {P}, {conc_RC}")
    number_density = conc_RC * LITERS_PER_M3 * constants.avogadro
    return P * constants.mu_p * constants.mu_0 * number_density


def enhancement_vs_thermal(series: "TimeSeries", field_G: float,
                           temperature_K: float = DEFAULT_TEMPERATURE_K) -> float:
    """Peak |⟨I_z⟩| of a run divided by the thermal polarization at field_G."""
    thermal = thermal_polarization(field_G, temperature_K)
    if thermal == 0:
        raise UsageError("Thermal polarization is zero at B = 0; give a positive field")
    return float(np.max(np.abs(series.iz))) / thermal


def _two_pass_moving_average(values: np.ndarray, width: int) -> np.ndarray:
    kernel = np.convolve(np.ones(width), np.ones(width)) / width ** 2
    return np.convolve(values, kernel, mode="valid")


def extract_mixing_frequency(qs_series: "TimeSeries",
                             smoothing_window: Optional[float] = None) -> float:
    """
    Singlet-triplet mixing frequency Ω = π / t_min.

    t_min is the first local minimum of ⟨Q_S⟩(t), refined by a parabola
    through the neighbouring samples. With `smoothing_window` (ns), ⟨Q_S⟩ is
    first passed twice through a moving average of that width so that fast
    hyperfine beats do not mask the slower singlet-triplet envelope.

    Args:
        qs_series: Hamiltonian-only run on a uniform time grid
        smoothing_window: Optional averaging width in ns

    Returns:
        Ω in rad/ns

    Raises:
        ObservableRangeError: If no local minimum is found
    """
    times = np.asarray(qs_series.times, dtype=float)
    values = np.asarray(qs_series.qs, dtype=float)
    if smoothing_window:
        step = float(times[1] - times[0]) if len(times) > 1 else 0.0
        if step <= 0 or not np.allclose(np.diff(times), step, rtol=1e-6, atol=0.0):
            raise UsageError("Smoothing requires a uniform time grid")
        width = max(1, int(round(smoothing_window / step)))
        if len(values) <= 2 * width:
            raise ObservableRangeError(
                f"Series of {len(values)} samples is too short for a {smoothing_window} ns "
                "smoothing window; run longer"
            )
        values = _two_pass_moving_average(values, width)
        times = times[width - 1: width - 1 + len(values)]

    for i in range(1, len(values) - 1):
        if values[i] < values[i - 1] and values[i] <= values[i + 1]:
            curvature = values[i - 1] - 2 * values[i] + values[i + 1]
            offset = 0.0
            if curvature > 0:
                offset = 0.5 * (values[i - 1] - values[i + 1]) / curvature
            t_min = times[i] + offset * (times[i + 1] - times[i])
            if t_min <= 0:
                break
            return float(np.pi / t_min)

    raise ObservableRangeError(
        "No local minimum of ⟨Q_S⟩ found; run longer to cover a full oscillation"
    )
