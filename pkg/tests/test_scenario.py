"""Tests for scenario parsing, rendering and preset loading."""

import pytest

from rpcidnp.analog.pendulum import KickMode, PendulumConfig
from rpcidnp.cli.scenario import (
    FREQUENCY_UNITS,
    RATE_UNITS,
    RunSettings,
    list_presets,
    load_scenario,
    parse_quantity,
    parse_scenario,
    preset_text,
    render_scenario,
    with_override,
)
from rpcidnp.core.system_model import Nucleus, ReactionModel, SpinSystemSpec
from rpcidnp.dynamics.stochastic import RemovalMode
from rpcidnp.errors import ConfigurationError, ScenarioParseError
from rpcidnp.observables.constants import CONSTANTS


MINIMAL = """\
system.model = kominis
system.A = 1.0
system.omega = 0.1
system.k = 4
run.t_end = 5
run.dt = 0.01
"""

COMPLEX = """\
# three nuclei on both radicals
system.model = custom_dephasing
system.omega = 0.2rad/ns
system.A = 1.0
system.A_2 = -0.5
system.electron_2 = 2
system.A_3 = 0.25
system.k_S = 2ns^-1
system.k_T = 2000us^-1
system.eta = 0.5

run.t_end = 2ns
run.dt = 5ps
run.sample_every = 4

mc.n_trajectories = 5000
mc.seed = 18446744073709551615
mc.removal_mode = stochastic_kill
mc.chunk_size = 256

outputs.csv_path = "runs/complex #1.csv"   # quoted, keeps the hash
outputs.mc_csv_path = "runs/complex_traj.csv"
outputs.emit_normalized = no
outputs.field = 0.1mT
outputs.temperature = 77K

pendulum.kick_mode = energy
pendulum.n_systems = 500
"""


def parse_error(text):
    with pytest.raises(ScenarioParseError) as excinfo:
        parse_scenario(text)
    return excinfo.value


class TestParseQuantity:
    """Tests for parse_quantity."""

    def test_bare_number(self):
        """Test a bare number reports no unit."""
        assert parse_quantity("0.1", FREQUENCY_UNITS) == (0.1, False)

    def test_suffix(self):
        """Test unit suffixes convert to the default unit."""
        assert parse_quantity("4ns^-1", RATE_UNITS) == (4.0, True)
        assert parse_quantity("2 us^-1", RATE_UNITS) == (pytest.approx(2e-3), True)
        assert parse_quantity("1G", FREQUENCY_UNITS)[0] == CONSTANTS.gamma_e

    def test_exponent(self):
        """Test scientific notation."""
        assert parse_quantity("1e-3", RATE_UNITS) == (1e-3, False)

    def test_rejected_unit(self):
        """Test a suffix outside the table lists the accepted ones."""
        with pytest.raises(ValueError, match="accepted units: ns"):
            parse_quantity("4K", RATE_UNITS)

    def test_not_a_number(self):
        """Test garbage is rejected."""
        with pytest.raises(ValueError, match="not a number"):
            parse_quantity("fast", RATE_UNITS)


class TestParseScenario:
    """Tests for parse_scenario."""

    def test_minimal(self):
        """Test a minimal spin-dynamics scenario."""
        scenario = parse_scenario(MINIMAL)
        assert scenario.system == SpinSystemSpec.single_nucleus(A=1.0, omega=0.1, model="kominis", k=4.0)
        assert scenario.run == RunSettings(t_end=5.0, dt=0.01)
        assert scenario.mc is None
        assert scenario.pendulum is None
        assert scenario.outputs.csv_path == "results.csv"

    def test_complex(self):
        """Test every section and unit conversion."""
        scenario = parse_scenario(COMPLEX)
        spec = scenario.system
        assert spec.reaction_model is ReactionModel.CUSTOM_DEPHASING
        assert spec.nuclei == (Nucleus(1.0, 1), Nucleus(-0.5, 2), Nucleus(0.25, 1))
        assert spec.k_singlet == 2.0
        assert spec.k_triplet == pytest.approx(2.0)
        assert spec.eta == 0.5
        assert scenario.run.dt == pytest.approx(0.005)
        assert scenario.run.sample_every == 4
        assert scenario.mc.seed == 2 ** 64 - 1
        assert scenario.mc.removal_mode is RemovalMode.STOCHASTIC_KILL
        assert scenario.outputs.csv_path == "runs/complex #1.csv"
        assert scenario.outputs.emit_normalized is False
        assert scenario.outputs.field == 1.0
        assert scenario.outputs.temperature == 77.0
        assert scenario.pendulum == PendulumConfig(kick_mode=KickMode.ENERGY, n_systems=500)

    def test_field_defaults_to_zeeman_field(self):
        """Test the thermal-comparison field follows omega."""
        scenario = parse_scenario(MINIMAL)
        assert scenario.field_G() == pytest.approx(0.1 / CONSTANTS.gamma_e)

    def test_rate_scale_scales_field(self):
        """Test outputs.rate_scale multiplies omega before the field conversion."""
        scenario = parse_scenario(MINIMAL + "outputs.rate_scale = 0.1\n")
        assert scenario.field_G() == pytest.approx(0.01 / CONSTANTS.gamma_e)
        moved = with_override(scenario, "system.omega", 0.2)
        assert moved.field_G() == pytest.approx(0.02 / CONSTANTS.gamma_e)

    def test_fixed_field_wins(self):
        """Test an explicit outputs.field ignores omega and rate_scale."""
        scenario = parse_scenario(MINIMAL + "outputs.rate_scale = 0.1\noutputs.field = 2G\n")
        assert with_override(scenario, "system.omega", 0.2).field_G() == 2.0

    def test_rate_scale_positive(self):
        """Test a non-positive rate_scale names its line."""
        assert "rate_scale" in str(parse_error(MINIMAL + "outputs.rate_scale = 0\n"))

    def test_unknown_key(self):
        """Test a misspelled key names the line and the valid keys."""
        error = parse_error(MINIMAL + "system.omgea = 0.2\n")
        assert error.line == 7
        assert "valid keys" in str(error)
        assert str(error).startswith("line 7:")

    def test_unknown_section(self):
        """Test an unknown section is rejected."""
        assert "unknown section" in parse_error(MINIMAL + "plot.color = red\n").reason

    def test_duplicate_key(self):
        """Test a key set twice is rejected."""
        error = parse_error(MINIMAL + "run.dt = 0.005\n")
        assert error.line == 7
        assert "first set on line 6" in error.reason

    def test_missing_equals(self):
        """Test a line without '=' is rejected."""
        assert parse_error("system.model kominis\n").line == 1

    def test_bad_unit(self):
        """Test a unit from the wrong dimension is rejected."""
        error = parse_error(MINIMAL.replace("system.k = 4", "system.k = 4G"))
        assert error.line == 4
        assert "accepted units" in error.reason

    def test_unknown_model(self):
        """Test an unknown model lists the valid ones."""
        error = parse_error(MINIMAL.replace("kominis", "kominos"))
        assert error.line == 1
        assert "jones_hore" in error.reason

    def test_k_conflict(self):
        """Test system.k together with system.k_S is rejected."""
        assert "conflicts" in parse_error(MINIMAL + "system.k_S = 1\n").reason

    def test_non_contiguous_nuclei(self):
        """Test A_3 without A_2 is rejected."""
        assert "contiguously" in parse_error(MINIMAL + "system.A_3 = 0.5\n").reason

    def test_electron_without_coupling(self):
        """Test an electron assignment needs its coupling."""
        assert "without system.A_2" in parse_error(MINIMAL + "system.electron_2 = 2\n").reason

    def test_integer_key(self):
        """Test integer keys reject fractions."""
        assert "integer" in parse_error(MINIMAL + "mc.n_trajectories = 1.5\n").reason

    def test_bool_key(self):
        """Test boolean keys reject other words."""
        assert "true or false" in parse_error(MINIMAL + "outputs.emit_normalized = maybe\n").reason

    def test_unterminated_quote(self):
        """Test an unterminated quoted string is rejected."""
        assert "unterminated" in parse_error(MINIMAL + 'outputs.csv_path = "a.csv\n').reason

    def test_missing_required_key(self):
        """Test run.dt is required."""
        assert "run.dt" in parse_error(MINIMAL.replace("run.dt = 0.01\n", "")).reason

    def test_mc_needs_trajectory_count(self):
        """Test mc.n_trajectories is required."""
        assert "mc.n_trajectories" in parse_error(MINIMAL + "mc.seed = 1\n").reason

    def test_run_without_system(self):
        """Test a run section alone is rejected."""
        assert "without a system" in parse_error("run.t_end = 5\nrun.dt = 0.01\n").reason

    def test_empty(self):
        """Test a file with only comments is rejected."""
        error = parse_error("# nothing here\n")
        assert error.line is None

    def test_invalid_values(self):
        """Test record validation errors carry the section."""
        error = parse_error(MINIMAL.replace("run.dt = 0.01", "run.dt = 10"))
        assert "invalid run section" in error.reason

    def test_invalid_system(self):
        """Test system validation errors become parse errors."""
        error = parse_error(MINIMAL.replace("kominis", "hamiltonian_only"))
        assert "hamiltonian_only" in error.reason

    def test_is_configuration_error(self):
        """Test parse errors are configuration errors."""
        with pytest.raises(ConfigurationError):
            parse_scenario("system.model = kominis\n")


class TestRenderScenario:
    """Tests for the canonical form."""

    @pytest.mark.parametrize("text", [MINIMAL, COMPLEX])
    def test_round_trip(self, text):
        """Test rendering parses back to an equal scenario."""
        scenario = parse_scenario(text)
        rendered = render_scenario(scenario)
        assert parse_scenario(rendered) == scenario
        assert render_scenario(parse_scenario(rendered)) == rendered

    def test_presets_round_trip(self):
        """Test every shipped preset survives rendering."""
        for name in list_presets():
            scenario = load_scenario(name)
            assert parse_scenario(render_scenario(scenario)) == scenario

    def test_sections_separated(self):
        """Test sections are separated by blank lines in a fixed order."""
        rendered = render_scenario(parse_scenario(MINIMAL))
        assert rendered.startswith("system.model = kominis\n")
        assert "\n\nrun.t_end = 5.0\n" in rendered
        assert 'outputs.csv_path = "results.csv"' in rendered


class TestWithOverride:
    """Tests for with_override."""

    def test_recombination_rate(self):
        """Test system.k sets both rates."""
        scenario = with_override(parse_scenario(MINIMAL), "system.k", 8.0)
        assert (scenario.system.k_singlet, scenario.system.k_triplet) == (8.0, 8.0)
        assert scenario.run == parse_scenario(MINIMAL).run

    def test_run_key(self):
        """Test other numeric keys are replaced in place."""
        assert with_override(parse_scenario(MINIMAL), "run.dt", 0.005).run.dt == 0.005

    def test_invalid_override(self):
        """Test an override that breaks validation is rejected."""
        with pytest.raises(ScenarioParseError):
            with_override(parse_scenario(MINIMAL), "run.dt", 50.0)


class TestPresets:
    """Tests for shipped presets."""

    def test_listed(self):
        """Test the bundled presets ship with the package."""
        assert {"fig3", "fig4", "fig4_jh", "haberkorn", "pendulum"} <= set(list_presets())

    def test_fig4(self):
        """Test the measurement-dephasing preset."""
        scenario = load_scenario("fig4")
        assert scenario.system == SpinSystemSpec.single_nucleus(A=1.0, omega=0.1, model="kominis", k=4.0)
        assert scenario.mc.n_trajectories == 100_000
        assert scenario.outputs.field is None
        assert scenario.outputs.rate_scale == 0.1
        assert scenario.field_G() == pytest.approx(0.5684, rel=1e-4)
        assert str(scenario.outputs.mc_path()) == "fig4_mc.csv"

    def test_pendulum(self):
        """Test the pendulum preset has no spin system."""
        scenario = load_scenario("pendulum")
        assert scenario.system is None
        assert scenario.pendulum == PendulumConfig(t_end=300.0, seed=7)

    def test_missing_preset(self):
        """Test an unknown preset name."""
        with pytest.raises(FileNotFoundError, match="available"):
            preset_text("fig9")

    def test_file_takes_precedence(self, tmp_path):
        """Test a scenario file path loads that file."""
        path = tmp_path / "custom.scn"
        path.write_text(MINIMAL.replace("system.k = 4", "system.k = 2"))
        assert load_scenario(path).system.k_singlet == 2.0

    def test_missing_file(self, tmp_path):
        """Test neither a file nor a preset."""
        with pytest.raises(FileNotFoundError, match="not found"):
            load_scenario(tmp_path / "nope.scn")
