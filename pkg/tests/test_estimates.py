"""Tests for closed-form estimates and derived observables."""

import logging

import numpy as np
import pytest

from rpcidnp.core.system_model import SpinSystemSpec, initial_state
from rpcidnp.dynamics.deterministic import integrate, peak_polarization
from rpcidnp.errors import ObservableRangeError, UsageError
from rpcidnp.observables.constants import CONSTANTS, PhysicalConstants
from rpcidnp.observables.estimates import (
    enhancement_factor,
    enhancement_vs_thermal,
    estimate_izqc,
    estimate_izS,
    extract_mixing_frequency,
    field_window,
    iz_proj,
    sample_field,
    thermal_polarization,
)


class TestPhysicalConstants:
    """Tests for PhysicalConstants."""

    def test_field_round_trip(self):
        """Test the Larmor conversion at 1 G."""
        assert CONSTANTS.larmor_from_field(1.0) == pytest.approx(0.017593, rel=1e-4)
        assert CONSTANTS.field_from_larmor(CONSTANTS.larmor_from_field(3.0)) == pytest.approx(3.0)

    def test_positive(self):
        """Test non-positive constants are rejected."""
        with pytest.raises(ValueError, match="gamma_ratio"):
            PhysicalConstants(gamma_ratio=0.0)


class TestScalingLaws:
    """Tests for the analytic polarization estimates."""

    def test_singlet_manifold_estimate(self):
        """Test -omega A / k^2."""
        assert estimate_izS(0.1, 1.0, 4.0) == pytest.approx(-0.00625)

    def test_measurement_estimate(self):
        """Test omega Omega^2 A / k^4."""
        assert estimate_izqc(0.01, 0.01, 0.1, 1.0) == pytest.approx(1e-7)

    def test_enhancement_reference_point(self):
        """Test the reference parameters give exactly 1000."""
        assert enhancement_factor(0.01, 0.1, 1.0) == 1000.0

    def test_enhancement_scaling(self):
        """Test enhancement scales as Omega^2 A / k^4."""
        assert enhancement_factor(0.02, 0.1, 1.0) == pytest.approx(4000.0)
        assert enhancement_factor(0.01, 0.1, 2.0) == pytest.approx(62.5)

    def test_enhancement_matches_ratio_to_thermal(self):
        """Test izqc / thermal agrees with the closed-form enhancement within 5%."""
        omega = 0.01
        field_G = CONSTANTS.field_from_larmor(omega)
        ratio = estimate_izqc(omega, 0.01, 0.1, 1.0) / thermal_polarization(field_G, 300.0)
        assert ratio == pytest.approx(enhancement_factor(0.01, 0.1, 1.0), rel=0.05)

    @pytest.mark.parametrize("func,args", [
        (estimate_izS, (0.1, 1.0, 0.0)),
        (estimate_izqc, (0.1, 0.01, 1.0, -1.0)),
        (enhancement_factor, (0.01, 0.1, 0.0)),
        (field_window, (0.0,)),
    ])
    def test_non_positive_rate(self, func, args):
        """Test k <= 0 is a usage error."""
        with pytest.raises(UsageError, match="positive"):
            func(*args)


class TestAnchors:
    """Tests for the physical-constant anchors."""

    def test_thermal_polarization(self):
        """Test thermal polarization at 1 G and 300 K is about 1e-10."""
        value = thermal_polarization(1.0, 300.0)
        assert 1e-10 <= value <= 3e-10
        assert value == pytest.approx(1.70e-10, rel=0.01)

    def test_field_window(self):
        """Test the low-field window for k = 1/ns is about 50 G."""
        assert 40.0 <= field_window(1.0) <= 70.0
        assert field_window(CONSTANTS.gamma_e) == 1.0

    def test_sample_field(self):
        """Test 1e-6 polarization at 1 mM gives tens of femtotesla."""
        value = sample_field(1e-6, 1e-3)
        assert 5e-15 <= value <= 40e-15
        assert value == pytest.approx(1.07e-14, rel=0.01)

    def test_thermal_linear_in_field(self):
        """Test thermal polarization doubles with the field."""
        assert thermal_polarization(2.0) == pytest.approx(2 * thermal_polarization(1.0))

    def test_thermal_invalid_inputs(self):
        """Test T <= 0 and B < 0 are rejected."""
        with pytest.raises(UsageError, match="Temperature"):
            thermal_polarization(1.0, 0.0)
        with pytest.raises(UsageError, match="Field"):
            thermal_polarization(-1.0, 300.0)

    def test_thermal_validity_warning(self, caplog):
        """Test a warning when the high-temperature expansion breaks down."""
        with caplog.at_level(logging.WARNING, logger="rpcidnp.observables.estimates"):
            thermal_polarization(1.0, 1e-6)
        assert "inaccurate" in caplog.text

    def test_sample_field_negative(self):
        """Test negative inputs are rejected."""
        with pytest.raises(UsageError):
            sample_field(-1e-6, 1e-3)


class TestLowFieldWindow:
    """Tests for the low-field character of measurement-induced polarization."""

    def test_high_field_suppressed(self):
        """Test the peak at omega = 10k is at least 5x below the peak at omega = k/10."""
        k = 4.0
        peaks = {}
        for omega in (k / 10, 10 * k):
            spec = SpinSystemSpec.single_nucleus(A=1.0, omega=omega, model="kominis", k=k)
            series = integrate(spec, t_end=3.0, dt=0.00125, sample_every=4)
            peaks[omega] = abs(peak_polarization(series).value)
        assert peaks[k / 10] >= 5 * peaks[10 * k]
        assert peaks[10 * k] > 0


class TestEnhancementVsThermal:
    """Tests for enhancement_vs_thermal."""

    def test_peak_over_thermal(self, make_series):
        """Test the peak magnitude is divided by the thermal value."""
        thermal = thermal_polarization(1.0)
        series = make_series([0.0, 1.0, 2.0], [0.0, thermal, -2 * thermal])
        assert enhancement_vs_thermal(series, 1.0) == pytest.approx(2.0)

    def test_zero_field(self, make_series):
        """Test B = 0 is a usage error."""
        with pytest.raises(UsageError, match="zero"):
            enhancement_vs_thermal(make_series([0.0], [1e-6]), 0.0)


class TestProjectedPolarization:
    """Tests for iz_proj."""

    def test_initial_state(self):
        """Test the singlet state carries no projected polarization."""
        rho = initial_state(SpinSystemSpec.single_nucleus(A=1.0, omega=0.1))
        assert abs(iz_proj(rho)) < 1e-15

    def test_reduced_form(self, fig3_series):
        """Test iz_proj = izS (2 qs - 1) when the manifolds are sorted."""
        expected = fig3_series.izS * (2 * fig3_series.qs - 1)
        assert np.abs(fig3_series.iz_proj - expected).max() < 1e-12

    def test_scale_invariant(self):
        """Test iz_proj normalizes the state."""
        rho = np.array(initial_state(SpinSystemSpec.single_nucleus(A=1.0, omega=0.1)))
        rho[0, 0] = 0.2
        assert iz_proj(0.5 * rho) == pytest.approx(iz_proj(rho), abs=1e-15)

    def test_zero_trace(self):
        """Test a zero-trace matrix is rejected."""
        with pytest.raises(UsageError, match="zero trace"):
            iz_proj(np.zeros((8, 8), dtype=complex))


class TestMixingFrequency:
    """Tests for extract_mixing_frequency."""

    def test_synthetic_cosine(self, make_series):
        """Test Omega = 2 for <Q_S> = (1 + cos 2t)/2."""
        times = np.arange(0, 501) * 0.01
        series = make_series(times, np.zeros_like(times), qs=0.5 * (1 + np.cos(2 * times)))
        assert extract_mixing_frequency(series) == pytest.approx(2.0, rel=1e-3)

    def test_no_minimum(self, make_series):
        """Test a monotonic series has no mixing frequency."""
        times = np.linspace(0, 1, 11)
        series = make_series(times, np.zeros_like(times), qs=1 - times / 2)
        with pytest.raises(ObservableRangeError, match="run longer"):
            extract_mixing_frequency(series)

    def test_hyperfine_scale(self, fig3_series):
        """Test the raw first minimum sits at t = pi/A, giving Omega = A."""
        omega = extract_mixing_frequency(fig3_series)
        assert omega == pytest.approx(1.0, rel=1e-3)

    def test_smoothed_envelope(self, fig3_series):
        """Test smoothing over one hyperfine period leaves the envelope minimum at t = 2pi/omega."""
        omega = extract_mixing_frequency(fig3_series, smoothing_window=2 * np.pi)
        assert omega == pytest.approx(0.05, rel=2e-3)

    def test_smoothing_needs_uniform_grid(self, make_series):
        """Test smoothing rejects a non-uniform grid."""
        times = np.array([0.0, 0.1, 0.3, 0.6, 1.0])
        series = make_series(times, np.zeros(5), qs=np.ones(5))
        with pytest.raises(UsageError, match="uniform"):
            extract_mixing_frequency(series, smoothing_window=0.2)

    def test_smoothing_too_short(self, make_series):
        """Test a window longer than the run is rejected."""
        times = np.arange(0, 11) * 0.1
        series = make_series(times, np.zeros(11), qs=np.ones(11))
        with pytest.raises(ObservableRangeError, match="too short"):
            extract_mixing_frequency(series, smoothing_window=1.0)
