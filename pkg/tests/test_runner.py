"""Tests for scenario execution, scans and estimates."""

import logging

import numpy as np
import pandas as pd
import pytest

from rpcidnp.cli.runner import (
    SCAN_COLUMNS,
    estimate,
    format_float,
    parse_scan_values,
    run_scenario,
    scan,
    simulate,
    trajectory_config,
    write_csv,
)
from rpcidnp.cli.scenario import load_scenario, parse_scenario
from rpcidnp.errors import ConfigurationError, UsageError


SCAN_BASE = """\
system.model = kominis
system.A = 1.0
system.omega = 0.1
system.k = 4
run.t_end = 3
run.dt = 0.005
"""


def kominis_at(omega):
    return parse_scenario(SCAN_BASE.replace("system.omega = 0.1", f"system.omega = {omega!r}")
                          .replace("run.dt = 0.005", "run.dt = 0.01").replace("run.t_end = 3", "run.t_end = 5"))


class TestFormatting:
    """Tests for CSV number formatting."""

    def test_shortest_round_trip(self):
        """Test the shortest decimal that round-trips."""
        assert format_float(0.1) == "0.1"
        assert format_float(3.0) == "3"
        assert float(format_float(1 / 3)) == 1 / 3

    def test_no_exponent(self):
        """Test tiny values stay in positional notation."""
        assert format_float(1e-20) == "0.00000000000000000001"

    def test_write_csv(self, tmp_path):
        """Test float columns are written positionally."""
        path = write_csv(pd.DataFrame({"t": [0.0, 0.5], "iz": [1e-17, -2.5e-6]}), tmp_path / "x.csv")
        assert path.read_text() == "t,iz\n0,0.00000000000000001\n0.5,-0.0000025\n"


class TestSimulate:
    """Tests for deterministic scenario runs."""

    def test_fig4_enhancement(self):
        """Test the fig4 preset peaks at order 1e4 over thermal."""
        summary = simulate(load_scenario("fig4"))
        assert 5e3 <= summary.enhancement <= 1e5
        assert summary.field_G == pytest.approx(0.5684, rel=1e-4)

    def test_enhancement_independent_of_field(self):
        """Test enhancement varies by less than 2x for omega in A/100..A/10."""
        values = [simulate(kominis_at(omega)).enhancement for omega in (0.01, 1 / 30, 0.1)]
        assert max(values) / min(values) < 2.0

    def test_zero_field_has_no_enhancement(self):
        """Test omega = 0 reports no enhancement."""
        summary = simulate(kominis_at(0.0))
        assert summary.enhancement is None
        assert "n/a" in summary.describe()

    def test_run_scenario_writes_csv(self, tmp_path):
        """Test the CSV has one row per sample."""
        summary = run_scenario(load_scenario("haberkorn"), tmp_path / "h.csv")
        frame = pd.read_csv(summary.csv_path)
        assert len(frame) == len(summary.series) == 501

    def test_needs_system(self):
        """Test a pendulum-only scenario cannot run spin dynamics."""
        with pytest.raises(ConfigurationError, match="system and run"):
            simulate(load_scenario("pendulum"))

    def test_trajectory_config_needs_mc(self):
        """Test the mc section is required for trajectories."""
        with pytest.raises(ConfigurationError, match="no mc section"):
            trajectory_config(load_scenario("fig4_jh"))


class TestScan:
    """Tests for parameter scans."""

    def test_recombination_scaling(self):
        """Test peak polarization falls as k^-4 within [-5, -3]."""
        table = scan(parse_scenario(SCAN_BASE), "system.k", [2.0, 4.0, 8.0], workers=3)
        assert list(table.columns) == list(SCAN_COLUMNS)
        assert list(table["value"]) == [2.0, 4.0, 8.0]
        slope = np.polyfit(np.log(table["value"]), np.log(np.abs(table["peak_iz"])), 1)[0]
        assert -5.0 <= slope <= -3.0

    def test_sequential_matches_parallel(self):
        """Test worker count does not change scan results."""
        base = parse_scenario(SCAN_BASE)
        one = scan(base, "system.k", [2.0, 4.0], workers=1)
        two = scan(base, "system.k", [2.0, 4.0], workers=2)
        pd.testing.assert_frame_equal(one, two)

    def test_omega_scan_on_preset(self):
        """Test the fig4 enhancement varies by less than 2x for omega in A/100..A/10."""
        table = scan(load_scenario("fig4"), "system.omega", [0.01, 1 / 30, 0.1], workers=3)
        enhancement = table["enhancement"]
        assert enhancement.max() / enhancement.min() < 2.0
        assert 5e3 <= enhancement.min()

    def test_omega_scan_fixed_field_warns(self, caplog):
        """Test a fixed outputs.field is reported when scanning omega."""
        base = parse_scenario(SCAN_BASE + "outputs.field = 0.5G\n")
        with caplog.at_level(logging.WARNING, logger="rpcidnp.cli.runner"):
            scan(base, "system.omega", [0.1], workers=1)
        assert any("held fixed" in r.getMessage() for r in caplog.records)

    def test_single_value_matches_simulate(self):
        """Test a one-value scan reproduces the plain run summary."""
        scenario = load_scenario("fig4")
        table = scan(scenario, "system.k", [4.0], workers=1)
        summary = simulate(scenario)
        assert len(table) == 1
        row = table.iloc[0]
        assert row["value"] == 4.0
        assert row["peak_iz"] == summary.peak.value
        assert row["t_peak"] == summary.peak.t_peak
        assert row["enhancement"] == summary.enhancement

    def test_mc_key_rejected(self):
        """Test keys outside system, run and outputs are rejected."""
        with pytest.raises(UsageError, match="only system"):
            scan(parse_scenario(SCAN_BASE), "mc.seed", [1.0])

    def test_parse_values_with_units(self):
        """Test scan values honour unit suffixes."""
        assert parse_scan_values("system.k", ["2", "4ns^-1", "8000us^-1"]) == pytest.approx([2.0, 4.0, 8.0])

    def test_parse_values_non_numeric_key(self):
        """Test non-numeric keys are rejected."""
        with pytest.raises(UsageError, match="not a numeric"):
            parse_scan_values("system.model", ["kominis"])

    def test_parse_values_bad_unit(self):
        """Test a bad suffix is a usage error."""
        with pytest.raises(UsageError, match="system.k"):
            parse_scan_values("system.k", ["4G"])


class TestEstimate:
    """Tests for closed-form estimate rows."""

    def test_available_rows(self):
        """Test only estimates with complete inputs are returned."""
        rows = estimate({"Omega": 0.01, "A": 0.1, "k": 1.0})
        assert [row.name for row in rows] == ["enhancement", "field_window"]
        assert rows[0].value == 1000.0

    def test_thermal_default_temperature(self):
        """Test thermal polarization defaults to 300 K."""
        (row,) = estimate({"B": 1.0})
        assert row.inputs == {"B": 1.0, "T": 300.0}
        assert row.value == pytest.approx(1.70e-10, rel=0.01)

    def test_only_requires_inputs(self):
        """Test --only makes inputs mandatory."""
        with pytest.raises(UsageError, match="--omega"):
            estimate({"A": 1.0, "k": 4.0}, only=["izS"])

    def test_only_unknown(self):
        """Test unknown estimate names are rejected."""
        with pytest.raises(UsageError, match="Unknown estimate"):
            estimate({"k": 1.0}, only=["magic"])

    def test_nothing_computable(self):
        """Test an empty input set is a usage error."""
        with pytest.raises(UsageError, match="No estimate"):
            estimate({})

    def test_describe(self):
        """Test the printed row echoes inputs and value."""
        (row,) = estimate({"P": 1e-6, "conc": 1e-3})
        text = row.describe()
        assert text.startswith("sample_field")
        assert "P=0.000001" in text
        assert text.endswith(" T")
