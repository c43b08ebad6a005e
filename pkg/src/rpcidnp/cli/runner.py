"""
Scenario execution: deterministic runs, Monte-Carlo runs, parameter scans,
closed-form estimates and the pendulum analog. Results go to CSV files.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..analog.pendulum import PendulumConfig, PendulumSeries, simulate_pendulums
from ..config import RuntimeConfig
from ..dynamics.deterministic import PeakPolarization, TimeSeries, integrate, peak_polarization
from ..dynamics.stochastic import TrajectoryConfig, TrajectoryEnsembleStats, run_ensemble
from ..errors import ConfigurationError, UsageError
from ..observables.estimates import (
    DEFAULT_TEMPERATURE_K,
    enhancement_factor,
    enhancement_vs_thermal,
    estimate_izqc,
    estimate_izS,
    field_window,
    sample_field,
    thermal_polarization,
)
from .scenario import NUMERIC_KEYS, SCHEMA, Scenario, parse_quantity, with_override


logger = logging.getLogger(__name__)

SCAN_COLUMNS = ("value", "peak_iz", "t_peak", "enhancement")


def format_float(value: float) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return np.format_float_positional(value, unique=True, trim="-")


def write_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    """
    Write a frame as plain CSV in decimal notation.

    Raises:
        OSError: If the path cannot be written
    """
    path = Path(path)
    text = frame.copy()
    for column in text.columns:
        if pd.api.types.is_float_dtype(text[column]):
            text[column] = text[column].map(format_float)
    text.to_csv(path, index=False, lineterminator="\n")
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


@dataclass
class RunSummary:
    """Outcome of one deterministic run."""

    series: TimeSeries
    peak: PeakPolarization
    field_G: float
    temperature_K: float
    enhancement: Optional[float]
    csv_path: Optional[Path] = None
    ensemble: Optional[TrajectoryEnsembleStats] = None
    mc_csv_path: Optional[Path] = None

    def describe(self) -> str:
        lines = [
            f"t_peak = {format_float(self.peak.t_peak)} ns",
            f"peak_iz = {format_float(self.peak.value)}",
        ]
        if self.enhancement is None:
            lines.append("enhancement = n/a (zero field)")
        else:
            lines.append(
                f"enhancement = {self.enhancement:.6g} "
                f"(vs thermal at {self.field_G:.6g} G, {self.temperature_K:g} K)"
            )
        return "\n".join(lines)


def _require_system(scenario: Scenario) -> None:
    if scenario.system is None or scenario.run is None:
        raise ConfigurationError("Scenario needs system and run sections for a spin-dynamics run")


def _enhancement(series: TimeSeries, field_G: float, temperature_K: float) -> Optional[float]:
    if field_G <= 0:
        return None
    return enhancement_vs_thermal(series, field_G, temperature_K)


def simulate(scenario: Scenario) -> RunSummary:
    """Integrate a scenario's master equation without writing anything."""
    _require_system(scenario)
    run = scenario.run
    series = integrate(scenario.system, run.t_end, run.dt, run.sample_every)
    field_G = scenario.field_G()
    temperature = scenario.outputs.temperature
    return RunSummary(
        series=series,
        peak=peak_polarization(series),
        field_G=field_G,
        temperature_K=temperature,
        enhancement=_enhancement(series, field_G, temperature),
    )


def run_scenario(scenario: Scenario, csv_path: Optional[Union[str, Path]] = None) -> RunSummary:
    """
    Run a scenario and write its time-series CSV.

    Args:
        scenario: Validated scenario with system and run sections
        csv_path: Overrides outputs.csv_path

    Returns:
        RunSummary with the series, peak and enhancement

    Raises:
        NumericalIntegrityError: If integration fails
        OSError: If the CSV cannot be written
    """
    summary = simulate(scenario)
    frame = summary.series.to_frame(emit_normalized=scenario.outputs.emit_normalized)
    summary.csv_path = write_csv(frame, csv_path or scenario.outputs.csv_path)
    return summary


def trajectory_config(scenario: Scenario) -> TrajectoryConfig:
    _require_system(scenario)
    if scenario.mc is None:
        raise ConfigurationError("Scenario has no mc section; add at least mc.n_trajectories")
    return TrajectoryConfig(
        n_trajectories=scenario.mc.n_trajectories,
        master_seed=scenario.mc.seed,
        dt=scenario.run.dt,
        t_end=scenario.run.t_end,
        removal_mode=scenario.mc.removal_mode,
        sample_every=scenario.run.sample_every,
        chunk_size=scenario.mc.chunk_size,
    )


def run_mc(scenario: Scenario, workers: Optional[int] = None,
           csv_path: Optional[Union[str, Path]] = None,
           mc_csv_path: Optional[Union[str, Path]] = None) -> RunSummary:
    """
    Deterministic run plus the trajectory ensemble for the same scenario.

    Writes the time-series CSV and the Monte-Carlo CSV.
    """
    config = trajectory_config(scenario)
    summary = run_scenario(scenario, csv_path)
    ensemble = run_ensemble(scenario.system, config, workers=workers)
    summary.ensemble = ensemble
    summary.mc_csv_path = write_csv(ensemble.to_frame(), mc_csv_path or scenario.outputs.mc_path())
    return summary


def parse_scan_values(param: str, values: Sequence[str]) -> List[float]:
    """
    Parse scan values for a dotted key, honouring that key's unit suffixes.

    Raises:
        UsageError: If the key is not numeric or a value is malformed
    """
    if param not in NUMERIC_KEYS:
        raise UsageError(
            f"Cannot scan '{param}': not a numeric scenario key. "
            f"Numeric keys: {', '.join(NUMERIC_KEYS)}"
        )
    section, name = param.split(".", 1)
    units = SCHEMA[section][name].units
    parsed = []
    for text in values:
        try:
            parsed.append(parse_quantity(text, units)[0])
        except ValueError as e:
            raise UsageError(f"Bad value for {param}: {e}")
    if not parsed:
        raise UsageError("Scan needs at least one value")
    return parsed


def scan(scenario: Scenario, param: str, values: Sequence[float],
         workers: Optional[int] = None) -> pd.DataFrame:
    """
    Independent runs with one numeric key varied.

    Args:
        scenario: Base scenario
        param: Dotted numeric key, e.g. "system.k"
        values: Values in the key's default unit
        workers: Concurrent runs (defaults to RuntimeConfig)

    Returns:
        One row per value in input order: value, peak_iz, t_peak, enhancement

    Raises:
        UsageError: If param is not a numeric key
    """
    if param not in NUMERIC_KEYS:
        raise UsageError(f"Cannot scan '{param}': not a numeric scenario key")
    if not param.startswith(("system.", "run.", "outputs.")):
        raise UsageError(f"Cannot scan '{param}': only system, run and outputs keys affect a run")
    _require_system(scenario)
    if param == "system.omega" and scenario.outputs.field is not None:
        logger.warning(
            f"outputs.field = {scenario.outputs.field} G is held fixed while scanning system.omega; "
            "use outputs.rate_scale for an enhancement that follows omega"
        )
    variants = [with_override(scenario, param, v) for v in values]
    workers = workers if workers is not None else RuntimeConfig().workers
    logger.info(f"Scanning {param} over {len(variants)} values on {workers} workers")

    if workers == 1:
        summaries = [simulate(v) for v in variants]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(simulate, variants))

    return pd.DataFrame({
        "value": [float(v) for v in values],
        "peak_iz": [s.peak.value for s in summaries],
        "t_peak": [s.peak.t_peak for s in summaries],
        "enhancement": [np.nan if s.enhancement is None else s.enhancement for s in summaries],
    }, columns=list(SCAN_COLUMNS))


@dataclass(frozen=True)
class EstimateRow:
    name: str
    formula: str
    inputs: Dict[str, float]
    value: float
    unit: str

    def describe(self) -> str:
        echoed = ", ".join(f"{k}={format_float(v)}" for k, v in self.inputs.items())
        unit = f" {self.unit}" if self.unit else ""
        return f"{self.name:<22} {self.formula:<28} [{echoed}]  {self.value:.6g}{unit}"


ESTIMATE_INPUTS = {
    "izS": ("omega", "A", "k"),
    "izqc": ("omega", "Omega", "A", "k"),
    "enhancement": ("Omega", "A", "k"),
    "field_window": ("k",),
    "thermal_polarization": ("B",),
    "sample_field": ("P", "conc"),
}


def estimate(quantities: Dict[str, float], only: Optional[Sequence[str]] = None) -> List[EstimateRow]:
    """
    Evaluate every closed-form estimate whose inputs are available.

    Args:
        quantities: Inputs in default units (rad/ns, 1/ns, G, K, mol/L)
        only: Restrict to these estimates; their inputs become mandatory

    Returns:
        Rows in a fixed order

    Raises:
        UsageError: If a requested estimate is missing inputs or none can be computed
    """
    given = {k: v for k, v in quantities.items() if v is not None}
    wanted = list(only) if only else list(ESTIMATE_INPUTS)
    for name in wanted:
        if name not in ESTIMATE_INPUTS:
            raise UsageError(f"Unknown estimate '{name}'; choose from {', '.join(ESTIMATE_INPUTS)}")
        missing = [k for k in ESTIMATE_INPUTS[name] if k not in given]
        if only and missing:
            raise UsageError(f"Estimate '{name}' needs --{' --'.join(missing)}")

    T = given.get("T", DEFAULT_TEMPERATURE_K)
    rows = []
    for name in wanted:
        needed = ESTIMATE_INPUTS[name]
        if any(k not in given for k in needed):
            continue
        inputs = {k: given[k] for k in needed}
        if name == "izS":
            rows.append(EstimateRow(name, "-ωA/k²", inputs, estimate_izS(given["omega"], given["A"], given["k"]), ""))
        elif name == "izqc":
            value = estimate_izqc(given["omega"], given["Omega"], given["A"], given["k"])
            rows.append(EstimateRow(name, "ωΩ²A/k⁴", inputs, value, ""))
        elif name == "enhancement":
            value = enhancement_factor(given["Omega"], given["A"], given["k"])
            rows.append(EstimateRow(name, "10³(Ω/0.01)²(A/0.1)/k⁴", inputs, value, ""))
        elif name == "field_window":
            rows.append(EstimateRow(name, "k/γ_e", inputs, field_window(given["k"]), "G"))
        elif name == "thermal_polarization":
            inputs["T"] = T
            rows.append(EstimateRow(name, "ħγ_eB/(4γk_BT)", inputs, thermal_polarization(given["B"], T), ""))
        elif name == "sample_field":
            value = sample_field(given["P"], given["conc"])
            rows.append(EstimateRow(name, "P·μ_p·μ_0·n", inputs, value, "T"))

    if not rows:
        raise UsageError(
            "No estimate can be computed from the given flags; e.g. --Omega 0.01 --A 0.1 --k 1, "
            "--k 1, --B 1 --T 300 or --P 1e-6 --conc 1mM"
        )
    return rows


@dataclass
class PendulumSummary:
    series: PendulumSeries
    t_peak: float
    peak: float
    csv_path: Optional[Path] = None

    def describe(self) -> str:
        return f"t_peak = {format_float(self.t_peak)}\npeak_displacement = {format_float(self.peak)}"


def run_pendulum(scenario: Scenario, workers: Optional[int] = None,
                 csv_path: Optional[Union[str, Path]] = None) -> PendulumSummary:
    """Simulate the pendulum ensemble of a scenario and write its CSV."""
    config = scenario.pendulum if scenario.pendulum is not None else PendulumConfig()
    series = simulate_pendulums(config, workers=workers)
    index = int(np.argmax(np.abs(series.displacement)))
    summary = PendulumSummary(series, float(series.times[index]), float(series.displacement[index]))
    summary.csv_path = write_csv(series.to_frame(), csv_path or scenario.outputs.csv_path)
    return summary
