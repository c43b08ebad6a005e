"""
Scenario files: a line-oriented `section.key = value` configuration format.

    # measurement-dephased pair, one nucleus
    system.model = kominis
    system.A = 1.0
    system.omega = 0.1
    system.k = 4ns^-1
    run.t_end = 5ns
    run.dt = 0.01

Sections are `system`, `run`, `mc`, `outputs` and `pendulum`. Numbers may
carry a unit suffix; bare numbers are in the default unit of their key
(rad/ns, 1/ns, ns, G, K). Unknown keys are errors. `render_scenario` writes
the canonical form, which parses back to an equal Scenario.
"""

import logging
import re
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from ..analog.pendulum import KickMode, PendulumConfig
from ..core.system_model import MAX_NUCLEI, Nucleus, ReactionModel, SpinSystemSpec
from ..dynamics.stochastic import RemovalMode
from ..errors import ConfigurationError, ScenarioParseError
from ..observables.constants import CONSTANTS
from ..observables.estimates import DEFAULT_TEMPERATURE_K


logger = logging.getLogger(__name__)

PRESET_PACKAGE = "rpcidnp.presets"
PRESET_SUFFIX = ".scn"

# Unit tables map suffix -> factor to the key's default unit.
FREQUENCY_UNITS = {
    "rad/ns": 1.0, "ns^-1": 1.0, "1/ns": 1.0, "/ns": 1.0,
    "rad/us": 1e-3, "us^-1": 1e-3, "1/us": 1e-3,
    "rad/s": 1e-9, "s^-1": 1e-9, "1/s": 1e-9,
    "G": CONSTANTS.gamma_e, "mT": 10 * CONSTANTS.gamma_e,
}
RATE_UNITS = {
    "ns^-1": 1.0, "1/ns": 1.0, "/ns": 1.0,
    "us^-1": 1e-3, "1/us": 1e-3, "s^-1": 1e-9, "1/s": 1e-9,
}
TIME_UNITS = {"ns": 1.0, "ps": 1e-3, "us": 1e3}
FIELD_UNITS = {"G": 1.0, "mT": 10.0, "T": 1e4}
TEMPERATURE_UNITS = {"K": 1.0}
CONCENTRATION_UNITS = {"M": 1.0, "mM": 1e-3, "uM": 1e-6}
NO_UNITS: Dict[str, float] = {}

_NUMBER = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(\S*)\s*$")
_KEY = re.compile(r"^([a-z_]+)\.([A-Za-z_0-9]+)$")


def parse_quantity(text: str, units: Dict[str, float]) -> Tuple[float, bool]:
    """
    Parse a number with an optional unit suffix.

    Args:
        text: e.g. "0.1", "4ns^-1", "1 G"
        units: Accepted suffixes and their conversion factors

    Returns:
        (value in the default unit, whether a suffix was given)

    Raises:
        ValueError: If the number is malformed or the suffix is not accepted
    """
    match = _NUMBER.match(text)
    if not match:
        raise ValueError(f"'{text}' is not a number")
    number, suffix = match.groups()
    value = float(number)
    if not suffix:
        return value, False
    if suffix not in units:
        accepted = ", ".join(units) if units else "none (dimensionless)"
        raise ValueError(f"unit '{suffix}' is not accepted here; accepted units: {accepted}")
    return value * units[suffix], True


@dataclass(frozen=True)
class RunSettings:
    t_end: float
    dt: float
    sample_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigurationError(f"run.dt must be positive, got {self.dt}")
        if self.t_end < self.dt:
            raise ConfigurationError(f"run.t_end ({self.t_end}) must be at least run.dt ({self.dt})")
        if self.sample_every < 1:
            raise ConfigurationError(f"run.sample_every must be at least 1, got {self.sample_every}")


@dataclass(frozen=True)
class McSettings:
    n_trajectories: int
    seed: int = 0
    removal_mode: RemovalMode = RemovalMode.ANALYTIC_WEIGHT
    chunk_size: int = 1024

    def __post_init__(self):
        object.__setattr__(self, "removal_mode", RemovalMode(self.removal_mode))
        if self.n_trajectories < 1:
            raise ConfigurationError(f"mc.n_trajectories must be at least 1, got {self.n_trajectories}")
        if self.chunk_size < 1:
            raise ConfigurationError(f"mc.chunk_size must be at least 1, got {self.chunk_size}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError(f"mc.seed must fit in 64 bits, got {self.seed}")


@dataclass(frozen=True)
class OutputSettings:
    csv_path: str = "results.csv"
    mc_csv_path: Optional[str] = None
    emit_normalized: bool = True
    field: Optional[float] = None
    temperature: float = DEFAULT_TEMPERATURE_K
    rate_scale: float = 1.0

    def __post_init__(self):
        if self.field is not None and self.field < 0:
            raise ConfigurationError(f"outputs.field must be non-negative, got {self.field}")
        if not self.rate_scale > 0:
            raise ConfigurationError(f"outputs.rate_scale must be positive, got {self.rate_scale}")
        if not self.temperature > 0:
            raise ConfigurationError(f"outputs.temperature must be positive, got {self.temperature}")

    def mc_path(self) -> Path:
        if self.mc_csv_path:
            return Path(self.mc_csv_path)
        csv = Path(self.csv_path)
        return csv.with_name(f"{csv.stem}_mc{csv.suffix or '.csv'}")


@dataclass(frozen=True)
class Scenario:
    """A validated scenario; `system` and `run` are absent for pendulum-only files."""

    system: Optional[SpinSystemSpec] = None
    run: Optional[RunSettings] = None
    mc: Optional[McSettings] = None
    outputs: OutputSettings = field(default_factory=OutputSettings)
    pendulum: Optional[PendulumConfig] = None

    def field_G(self) -> float:
        """
        Field used for thermal comparisons in Gauss.

        outputs.field wins when set. Otherwise it is the Zeeman field of
        ω · outputs.rate_scale, so it follows ω through overrides and scans.
        """
        if self.outputs.field is not None:
            return self.outputs.field
        if self.system is None:
            raise ConfigurationError("Scenario has no system section to derive a field from")
        return CONSTANTS.field_from_larmor(abs(self.system.larmor_omega) * self.outputs.rate_scale)


@dataclass(frozen=True)
class _Key:
    kind: str  # float, int, bool, str
    units: Dict[str, float]


_SYSTEM_KEYS = {
    "model": _Key("str", NO_UNITS),
    "omega": _Key("float", FREQUENCY_UNITS),
    "A": _Key("float", FREQUENCY_UNITS),
    "electron": _Key("int", NO_UNITS),
    "k_S": _Key("float", RATE_UNITS),
    "k_T": _Key("float", RATE_UNITS),
    "k": _Key("float", RATE_UNITS),
    "eta": _Key("float", RATE_UNITS),
}
for _i in range(2, MAX_NUCLEI + 1):
    _SYSTEM_KEYS[f"A_{_i}"] = _Key("float", FREQUENCY_UNITS)
    _SYSTEM_KEYS[f"electron_{_i}"] = _Key("int", NO_UNITS)

SCHEMA: Dict[str, Dict[str, _Key]] = {
    "system": _SYSTEM_KEYS,
    "run": {
        "t_end": _Key("float", TIME_UNITS),
        "dt": _Key("float", TIME_UNITS),
        "sample_every": _Key("int", NO_UNITS),
    },
    "mc": {
        "n_trajectories": _Key("int", NO_UNITS),
        "seed": _Key("int", NO_UNITS),
        "removal_mode": _Key("str", NO_UNITS),
        "chunk_size": _Key("int", NO_UNITS),
    },
    "outputs": {
        "csv_path": _Key("str", NO_UNITS),
        "mc_csv_path": _Key("str", NO_UNITS),
        "emit_normalized": _Key("bool", NO_UNITS),
        "field": _Key("float", FIELD_UNITS),
        "temperature": _Key("float", TEMPERATURE_UNITS),
        "rate_scale": _Key("float", NO_UNITS),
    },
    "pendulum": {
        "omega0": _Key("float", NO_UNITS),
        "coupling": _Key("float", NO_UNITS),
        "kick_rate": _Key("float", NO_UNITS),
        "decay_rate": _Key("float", NO_UNITS),
        "n_systems": _Key("int", NO_UNITS),
        "dt": _Key("float", NO_UNITS),
        "t_end": _Key("float", NO_UNITS),
        "seed": _Key("int", NO_UNITS),
        "kick_mode": _Key("str", NO_UNITS),
        "chunk_size": _Key("int", NO_UNITS),
    },
}

NUMERIC_KEYS = tuple(
    f"{section}.{name}"
    for section, keys in SCHEMA.items()
    for name, key in keys.items()
    if key.kind in ("float", "int")
)

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


@dataclass
class _Entry:
    value: Union[float, int, bool, str]
    line: int


def _split_value(raw: str, line: int) -> Tuple[str, bool]:
    """Strip comments and quotes. Returns (text, was_quoted)."""
    raw = raw.strip()
    if raw.startswith('"'):
        end = raw.find('"', 1)
        if end == -1:
            raise ScenarioParseError("unterminated quoted string", line)
        rest = raw[end + 1:].strip()
        if rest and not rest.startswith("#"):
            raise ScenarioParseError(f"unexpected text after quoted string: '{rest}'", line)
        return raw[1:end], True
    return raw.split("#", 1)[0].strip(), False


def _convert(section: str, name: str, text: str, quoted: bool, line: int) -> Union[float, int, bool, str]:
    key = SCHEMA[section][name]
    if key.kind == "str":
        if not text:
            raise ScenarioParseError(f"{section}.{name} needs a value", line)
        return text
    if quoted:
        raise ScenarioParseError(f"{section}.{name} expects a {key.kind}, not a quoted string", line)
    if key.kind == "bool":
        lowered = text.lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        raise ScenarioParseError(f"{section}.{name} expects true or false, got '{text}'", line)
    if key.kind == "int" and re.fullmatch(r"[+-]?\d+", text):
        # exact for 64-bit seeds
        return int(text)
    try:
        value, _ = parse_quantity(text, key.units)
    except ValueError as e:
        raise ScenarioParseError(f"{section}.{name}: {e}", line)
    if key.kind == "int":
        if not value.is_integer():
            raise ScenarioParseError(f"{section}.{name} expects an integer, got '{text}'", line)
        return int(value)
    return value


def _read_entries(text: str) -> Dict[str, Dict[str, _Entry]]:
    entries: Dict[str, Dict[str, _Entry]] = {}
    for number, raw_line in enumerate(text.splitlines(), start=1):
        stripped = raw_line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ScenarioParseError(f"expected 'section.key = value', got '{stripped}'", number)
        raw_key, raw_value = stripped.split("=", 1)
        match = _KEY.match(raw_key.strip())
        if not match:
            raise ScenarioParseError(f"malformed key '{raw_key.strip()}'", number)
        section, name = match.groups()
        if section not in SCHEMA:
            raise ScenarioParseError(
                f"unknown section '{section}'; valid sections: {', '.join(SCHEMA)}", number
            )
        if name not in SCHEMA[section]:
            raise ScenarioParseError(
                f"unknown key '{section}.{name}'; valid keys: {', '.join(SCHEMA[section])}", number
            )
        if name in entries.get(section, {}):
            first = entries[section][name].line
            raise ScenarioParseError(f"duplicate key '{section}.{name}' (first set on line {first})", number)
        value_text, quoted = _split_value(raw_value, number)
        value = _convert(section, name, value_text, quoted, number)
        entries.setdefault(section, {})[name] = _Entry(value, number)
    return entries


def _first_line(section: Dict[str, _Entry]) -> Optional[int]:
    return min((e.line for e in section.values()), default=None)


def _require(section_name: str, section: Dict[str, _Entry], name: str) -> _Entry:
    if name not in section:
        raise ScenarioParseError(f"missing required key '{section_name}.{name}'", _first_line(section))
    return section[name]


def _build_system(section: Dict[str, _Entry]) -> SpinSystemSpec:
    model_entry = _require("system", section, "model")
    try:
        model = ReactionModel.parse(model_entry.value)
    except ConfigurationError as e:
        raise ScenarioParseError(str(e), model_entry.line)
    omega = _require("system", section, "omega").value

    nuclei: List[Nucleus] = []
    for index in range(1, MAX_NUCLEI + 1):
        suffix = "" if index == 1 else f"_{index}"
        coupling = section.get(f"A{suffix}")
        electron = section.get(f"electron{suffix}")
        if coupling is None:
            if electron is not None:
                raise ScenarioParseError(f"system.electron{suffix} given without system.A{suffix}", electron.line)
            later = [section[f"A_{j}"] for j in range(index + 1, MAX_NUCLEI + 1) if f"A_{j}" in section]
            if later:
                raise ScenarioParseError(
                    f"hyperfine couplings must be numbered contiguously; system.A{suffix} is missing",
                    later[0].line,
                )
            break
        try:
            nuclei.append(Nucleus(coupling.value, electron.value if electron else 1))
        except ConfigurationError as e:
            raise ScenarioParseError(str(e), (electron or coupling).line)

    if "k" in section:
        for explicit in ("k_S", "k_T"):
            if explicit in section:
                raise ScenarioParseError(
                    f"system.k conflicts with system.{explicit}; give one or the other",
                    section[explicit].line,
                )
        k_S = k_T = section["k"].value
    else:
        k_S = section["k_S"].value if "k_S" in section else 0.0
        k_T = section["k_T"].value if "k_T" in section else 0.0

    eta = section["eta"].value if "eta" in section else None
    try:
        return SpinSystemSpec(tuple(nuclei), omega, k_S, k_T, model, eta)
    except ConfigurationError as e:
        raise ScenarioParseError(str(e), model_entry.line)


def _build_record(cls, section_name: str, section: Dict[str, _Entry], required: Tuple[str, ...] = ()):
    for name in required:
        _require(section_name, section, name)
    try:
        return cls(**{name: entry.value for name, entry in section.items()})
    except (ConfigurationError, ValueError) as e:
        raise ScenarioParseError(f"invalid {section_name} section: {e}", _first_line(section))


def parse_scenario(text: str) -> Scenario:
    """
    Parse and validate scenario text.

    Args:
        text: Scenario file contents

    Returns:
        Fully validated Scenario

    Raises:
        ScenarioParseError: On unknown or duplicate keys, missing required
            keys, bad unit suffixes or out-of-range values
    """
    entries = _read_entries(text)
    system_section = entries.get("system", {})
    run_section = entries.get("run", {})

    if not system_section and not run_section and "pendulum" not in entries:
        raise ScenarioParseError("scenario defines neither a system nor a pendulum section")

    system = run = None
    if system_section or run_section:
        if not system_section:
            raise ScenarioParseError("run section given without a system section", _first_line(run_section))
        system = _build_system(system_section)
        run = _build_record(RunSettings, "run", run_section, required=("t_end", "dt"))

    mc = None
    if "mc" in entries:
        mc = _build_record(McSettings, "mc", entries["mc"], required=("n_trajectories",))
    outputs = _build_record(OutputSettings, "outputs", entries.get("outputs", {}))
    pendulum = None
    if "pendulum" in entries:
        pendulum = _build_record(PendulumConfig, "pendulum", entries["pendulum"])

    scenario = Scenario(system=system, run=run, mc=mc, outputs=outputs, pendulum=pendulum)
    logger.debug(f"Parsed scenario with sections {sorted(entries)}")
    return scenario


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (ReactionModel, RemovalMode, KickMode)):
        return value.value
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def scenario_items(scenario: Scenario) -> List[Tuple[str, object]]:
    """Canonical (dotted key, value) pairs of a scenario, in render order."""
    items: List[Tuple[str, object]] = []
    spec = scenario.system
    if spec is not None:
        items.append(("system.model", spec.reaction_model))
        items.append(("system.omega", spec.larmor_omega))
        for index, nucleus in enumerate(spec.nuclei, start=1):
            suffix = "" if index == 1 else f"_{index}"
            items.append((f"system.A{suffix}", nucleus.coupling_A))
            if nucleus.attached_electron != 1:
                items.append((f"system.electron{suffix}", nucleus.attached_electron))
        items.append(("system.k_S", spec.k_singlet))
        items.append(("system.k_T", spec.k_triplet))
        if spec.eta is not None:
            items.append(("system.eta", spec.eta))
    for section, record in (("run", scenario.run), ("mc", scenario.mc),
                            ("outputs", scenario.outputs), ("pendulum", scenario.pendulum)):
        if record is None:
            continue
        for f in fields(record):
            value = getattr(record, f.name)
            if value is not None:
                items.append((f"{section}.{f.name}", value))
    return items


def render_scenario(scenario: Scenario) -> str:
    """Canonical scenario text; parse_scenario(render_scenario(s)) == s."""
    lines = []
    previous = None
    for key, value in scenario_items(scenario):
        section = key.split(".", 1)[0]
        if previous is not None and section != previous:
            lines.append("")
        previous = section
        lines.append(f"{key} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def with_override(scenario: Scenario, key: str, value: float) -> Scenario:
    """
    Copy of a scenario with one numeric key replaced.

    `system.k` sets both recombination rates.

    Raises:
        ScenarioParseError: If the new value is invalid for the key
    """
    items = [(k, v) for k, v in scenario_items(scenario)]
    replaced = [(k, v) for k, v in items if k != key and not (key == "system.k" and k in ("system.k_S", "system.k_T"))]
    replaced.append((key, value))
    text = "\n".join(f"{k} = {_format_value(v)}" for k, v in replaced) + "\n"
    return parse_scenario(text)


def list_presets() -> List[str]:
    """Names of the scenarios shipped with the package."""
    root = resources.files(PRESET_PACKAGE)
    return sorted(p.name[: -len(PRESET_SUFFIX)] for p in root.iterdir() if p.name.endswith(PRESET_SUFFIX))


def preset_text(name: str) -> str:
    """
    Contents of a shipped preset.

    Raises:
        FileNotFoundError: If no preset has that name
    """
    resource = resources.files(PRESET_PACKAGE).joinpath(f"{name}{PRESET_SUFFIX}")
    if not resource.is_file():
        raise FileNotFoundError(f"Preset not found: {name} (available: {', '.join(list_presets())})")
    return resource.read_text(encoding="utf-8")


def load_scenario(source: Union[str, Path]) -> Scenario:
    """
    Load a scenario from a file path or a preset name.

    Args:
        source: Path to a scenario file, or the name of a shipped preset

    Raises:
        FileNotFoundError: If neither a file nor a preset matches
        ScenarioParseError: If the contents are invalid
    """
    path = Path(source)
    if path.is_file():
        logger.info(f"Loading scenario {path}")
        return parse_scenario(path.read_text(encoding="utf-8"))
    if str(source) in list_presets():
        logger.info(f"Loading preset {source}")
        return parse_scenario(preset_text(str(source)))
    raise FileNotFoundError(f"Scenario file not found: {source}")
