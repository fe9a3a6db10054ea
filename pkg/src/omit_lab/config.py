"""INI run configuration.

Grammar: standard ``configparser`` INI (``[section]`` headers, ``key = value``
lines, ``#``/``;`` comments). Every physical quantity carries its unit in the
key name. Sections and keys::

    [system]   omega_a_over_2pi_hz  omega_b_over_2pi_hz  omega_c_over_2pi_hz
               kappa_a_over_2pi_hz  gamma_b_over_2pi_hz  gamma_c_over_2pi_hz
               J_over_2pi_hz
               g_om_over_2pi_hz   (or both mass_kg and length_m)
    [drive]    pump_power_mw | pump_amplitude_per_sqrt_s          (one required)
               effective_detuning_over_omega_m | pump_detuning_over_omega_m |
               effective_detuning_rad_s | pump_detuning_rad_s      (default: effective = 1 omega_m)
               probe_ratio | probe_amplitude_per_sqrt_s            (default: probe_ratio = 0.001)
               eta  phi_over_pi  phi_p_over_pi                    (default 0)
               drive_frequency_over_omega_m | drive_frequency_rad_s (default: locked to the probe)
    [sweep]    start  stop  points                                 (normalized detuning)
               eta_values | phi_over_pi_values                     (comma-separated; optional)
    [output]   name  formats (csv, json, svg)  directory
    [solver]   gauge (real-G | raw)  damping  rtol  max_iter
"""
from __future__ import annotations

import configparser
import math
import re
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError, InvalidParameterError
from .params import TWO_PI, DriveParams, SystemParams, derive_g_om
from .steady import SolverControls
from .sweep import AxisSpec, Scenario, SecondAxis

SYSTEM_RATES = ("omega_a", "omega_b", "omega_c", "kappa_a", "gamma_b", "gamma_c", "J", "g_om")
SYSTEM_KEYS = {f"{name}_over_2pi_hz".lower() for name in SYSTEM_RATES} | {"mass_kg", "length_m"}
DRIVE_KEYS = {
    "pump_power_mw",
    "pump_amplitude_per_sqrt_s",
    "effective_detuning_over_omega_m",
    "pump_detuning_over_omega_m",
    "effective_detuning_rad_s",
    "pump_detuning_rad_s",
    "probe_ratio",
    "probe_amplitude_per_sqrt_s",
    "eta",
    "phi_over_pi",
    "phi_p_over_pi",
    "drive_frequency_over_omega_m",
    "drive_frequency_rad_s",
}
SWEEP_KEYS = {"start", "stop", "points", "eta_values", "phi_over_pi_values"}
OUTPUT_KEYS = {"name", "formats", "directory"}
SOLVER_KEYS = {"gauge", "damping", "rtol", "max_iter"}
SECTIONS = {
    "system": SYSTEM_KEYS,
    "drive": DRIVE_KEYS,
    "sweep": SWEEP_KEYS,
    "output": OUTPUT_KEYS,
    "solver": SOLVER_KEYS,
}
# bare quantity names that need a unit suffix
UNTAGGED = {
    "omega_a", "omega_b", "omega_c", "kappa_a", "gamma_b", "gamma_c", "j", "g_om",
    "mass", "length", "m", "l", "pump_power", "p_pu", "epsilon_pu", "epsilon_pr", "epsilon_d",
    "delta", "phi", "phi_p", "phi_d", "detuning", "effective_detuning", "pump_detuning",
    "drive_frequency", "omega_d",
}
FORMATS = ("csv", "json", "svg")


class ConfigWarning(UserWarning):
    pass


@dataclass(frozen=True)
class OutputSpec:
    name: str = "spectrum"
    formats: tuple = ("csv", "svg")
    directory: str = "."


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    output: OutputSpec = OutputSpec()


def normalize_gauge(value):
    v = value.strip().lower()
    if v in ("real-g", "real_g", "realg"):
        return "real-G"
    if v == "raw":
        return "raw"
    raise ConfigError(f"gauge must be 'real-G' or 'raw', got {value!r}", key="gauge")


def _line_index(text):
    """Map (section, key) to 1-based line numbers."""
    index = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"^\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            index[(section, m.group(1).strip().lower())] = lineno
    return index


class _Reader:
    def __init__(self, parser, lines, source):
        self.parser = parser
        self.lines = lines
        self.source = source

    def has(self, section, key):
        return self.parser.has_option(section, key)

    def where(self, section, key):
        line = self.lines.get((section, key.lower()))
        return f"{self.source}:{line}" if line else self.source

    def text(self, section, key):
        return self.parser.get(section, key).strip()

    def number(self, section, key):
        raw = self.text(section, key)
        try:
            value = float(raw)
        except ValueError:
            raise ConfigError(
                f"{self.where(section, key)}: [{section}] {key} = {raw!r} is not a number",
                key=f"{section}.{key}",
                line=self.lines.get((section, key.lower())),
            ) from None
        if not math.isfinite(value):
            raise ConfigError(f"{self.where(section, key)}: [{section}] {key} must be finite", key=f"{section}.{key}")
        return value

    def integer(self, section, key):
        value = self.number(section, key)
        if value != int(value):
            raise ConfigError(f"{self.where(section, key)}: [{section}] {key} must be an integer", key=f"{section}.{key}")
        return int(value)

    def numbers(self, section, key):
        raw = self.text(section, key)
        try:
            return tuple(float(v) for v in raw.replace(",", " ").split())
        except ValueError:
            raise ConfigError(
                f"{self.where(section, key)}: [{section}] {key} must be a list of numbers",
                key=f"{section}.{key}",
            ) from None

    def one_of(self, section, keys):
        present = [k for k in keys if self.has(section, k)]
        if len(present) > 1:
            raise ConfigError(
                f"[{section}] give at most one of {', '.join(keys)}; found {', '.join(present)}",
                key=f"{section}.{present[1]}",
            )
        return present[0] if present else None


def _parse(text, source):
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#", ";"), strict=True, empty_lines_in_values=False
    )
    parser.optionxform = str.lower
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: key outside of any [section]", line=exc.lineno) from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise ConfigError(f"{source}:{exc.lineno}: {exc.message}", line=exc.lineno) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ConfigError(f"{source}:{lineno}: cannot parse line {exc.errors[0][1]!r}", line=lineno) from None
    return parser


def _check_keys(reader):
    parser = reader.parser
    for section in parser.sections():
        if section not in SECTIONS:
            raise ConfigError(f"{reader.source}: unknown section [{section}]", key=section)
        allowed = SECTIONS[section]
        for key in parser.options(section):
            if key in allowed:
                continue
            if key in UNTAGGED:
                raise ConfigError(
                    f"{reader.where(section, key)}: [{section}] {key} has no unit tag "
                    f"(e.g. {key}_over_2pi_hz, {key}_rad_s, {key}_over_pi)",
                    key=f"{section}.{key}",
                    line=reader.lines.get((section, key)),
                )
            raise ConfigError(
                f"{reader.where(section, key)}: unknown key [{section}] {key}",
                key=f"{section}.{key}",
                line=reader.lines.get((section, key)),
            )


def _missing_required(reader):
    missing = []
    for name in ("omega_a", "omega_b", "omega_c", "kappa_a", "gamma_b", "gamma_c", "J"):
        key = f"{name}_over_2pi_hz".lower()
        if not reader.has("system", key):
            missing.append(f"[system] {name}_over_2pi_hz")
    if not reader.has("system", "g_om_over_2pi_hz") and not (
        reader.has("system", "mass_kg") and reader.has("system", "length_m")
    ):
        missing.append("[system] g_om_over_2pi_hz (or mass_kg and length_m)")
    if not (reader.has("drive", "pump_power_mw") or reader.has("drive", "pump_amplitude_per_sqrt_s")):
        missing.append("[drive] pump_power_mw (or pump_amplitude_per_sqrt_s)")
    return missing


def _system(reader):
    hz = {}
    for name in ("omega_a", "omega_b", "omega_c", "kappa_a", "gamma_b", "gamma_c", "J"):
        hz[name] = reader.number("system", f"{name}_over_2pi_hz".lower())
    m = reader.number("system", "mass_kg") if reader.has("system", "mass_kg") else None
    L = reader.number("system", "length_m") if reader.has("system", "length_m") else None
    if reader.has("system", "g_om_over_2pi_hz"):
        hz["g_om"] = reader.number("system", "g_om_over_2pi_hz")
        return SystemParams.from_hz(**hz, m=m, L=L)
    if m is None or L is None:
        raise ConfigError("[system] needs g_om_over_2pi_hz or both mass_kg and length_m", key="system.g_om_over_2pi_hz")
    rates = {name: TWO_PI * value for name, value in hz.items()}
    return SystemParams(**rates, g_om=derive_g_om(rates["omega_a"], L, m, rates["omega_b"]), m=m, L=L)


def _drive(reader, sys):
    det_key = reader.one_of(
        "drive",
        ("effective_detuning_over_omega_m", "pump_detuning_over_omega_m", "effective_detuning_rad_s", "pump_detuning_rad_s"),
    )
    if det_key is None:
        detuning = {"Delta_a_eff": 1.0 * sys.omega_b}
    else:
        value = reader.number("drive", det_key)
        if det_key.endswith("over_omega_m"):
            value = value * sys.omega_b
        detuning = {"Delta_a_eff" if det_key.startswith("effective") else "Delta_a": value}

    pump_key = reader.one_of("drive", ("pump_power_mw", "pump_amplitude_per_sqrt_s"))
    if pump_key == "pump_power_mw":
        base = DriveParams.from_power(sys, reader.number("drive", pump_key) * 1e-3, **detuning)
    else:
        base = DriveParams(epsilon_pu=reader.number("drive", pump_key), **detuning)

    probe_key = reader.one_of("drive", ("probe_ratio", "probe_amplitude_per_sqrt_s"))
    if probe_key == "probe_amplitude_per_sqrt_s":
        eps_pr = reader.number("drive", probe_key)
    else:
        ratio = reader.number("drive", probe_key) if probe_key else 1e-3
        eps_pr = ratio * base.epsilon_pu

    freq_key = reader.one_of("drive", ("drive_frequency_over_omega_m", "drive_frequency_rad_s"))
    omega_d = None
    if freq_key is not None:
        omega_d = reader.number("drive", freq_key)
        if freq_key.endswith("over_omega_m"):
            omega_d = omega_d * sys.omega_b

    eta = reader.number("drive", "eta") if reader.has("drive", "eta") else 0.0
    phi = reader.number("drive", "phi_over_pi") * math.pi if reader.has("drive", "phi_over_pi") else 0.0
    phi_p = reader.number("drive", "phi_p_over_pi") * math.pi if reader.has("drive", "phi_p_over_pi") else 0.0
    drive = base.replace(epsilon_pr=eps_pr, phi_p=phi_p, omega_d=omega_d)
    return drive.with_eta_phi(eta, phi)


def _sweep(reader):
    kw = {}
    if reader.has("sweep", "start"):
        kw["start"] = reader.number("sweep", "start")
    if reader.has("sweep", "stop"):
        kw["stop"] = reader.number("sweep", "stop")
    if reader.has("sweep", "points"):
        kw["count"] = reader.integer("sweep", "points")
    axis = AxisSpec(**kw)
    second_key = reader.one_of("sweep", ("eta_values", "phi_over_pi_values"))
    second = None
    if second_key == "eta_values":
        second = SecondAxis("eta", reader.numbers("sweep", second_key))
    elif second_key == "phi_over_pi_values":
        second = SecondAxis("phi", tuple(v * math.pi for v in reader.numbers("sweep", second_key)))
    return axis, second


def _solver(reader):
    gauge = normalize_gauge(reader.text("solver", "gauge")) if reader.has("solver", "gauge") else "real-G"
    kw = {}
    if reader.has("solver", "damping"):
        kw["damping"] = reader.number("solver", "damping")
    if reader.has("solver", "rtol"):
        kw["rtol"] = reader.number("solver", "rtol")
    if reader.has("solver", "max_iter"):
        kw["max_iter"] = reader.integer("solver", "max_iter")
    return gauge, SolverControls(**kw)


def _output(reader):
    kw = {}
    if reader.has("output", "name"):
        kw["name"] = reader.text("output", "name")
    if reader.has("output", "formats"):
        formats = tuple(f.strip().lower() for f in reader.text("output", "formats").replace(",", " ").split())
        bad = [f for f in formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"[output] formats: unknown format(s) {bad}; expected {FORMATS}", key="output.formats")
        kw["formats"] = formats
    if reader.has("output", "directory"):
        kw["directory"] = reader.text("output", "directory")
    return OutputSpec(**kw)


def _warn_regime(sys, drive):
    if not sys.resolved_sideband:
        warnings.warn("system is outside the resolved-sideband regime (omega_b, omega_c <= 10 kappa_a)", ConfigWarning)
    if not sys.high_Q:
        warnings.warn("mechanical quality factors are below 1e3", ConfigWarning)
    if not drive.weak_probe:
        warnings.warn("probe is not weak compared with the pump (epsilon_pr >= 0.1 epsilon_pu)", ConfigWarning)
    if not drive.weak_mechanical_drive:
        warnings.warn("mechanical drive is not weak compared with the pump (epsilon_d >= 0.1 epsilon_pu)", ConfigWarning)


def parse_config(text, source="<config>") -> RunConfig:
    reader = _Reader(_parse(text, source), _line_index(text), source)
    _check_keys(reader)
    missing = _missing_required(reader)
    if missing:
        raise ConfigError(f"{source}: missing required keys: " + "; ".join(missing), key=missing[0])
    try:
        sys = _system(reader)
        drive = _drive(reader, sys)
        axis, second = _sweep(reader)
        gauge, solver = _solver(reader)
    except InvalidParameterError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    if second is not None and second.kind == "eta" and drive.epsilon_pr <= 0:
        raise ConfigError(f"{source}: an eta sweep needs a positive probe amplitude", key="drive.probe_ratio")
    output = _output(reader)
    _warn_regime(sys, drive)
    return RunConfig(Scenario(output.name, sys, drive, axis, second, gauge, solver), output)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, source=str(path))


def bundled_config_path(fig_id):
    return resources.files("omit_lab") / "presets" / f"{fig_id}.ini"


def load_bundled(fig_id) -> RunConfig:
    ref = bundled_config_path(fig_id)
    if not ref.is_file():
        raise ConfigError(f"no bundled config named {fig_id!r}")
    return parse_config(ref.read_text(), source=f"presets/{fig_id}.ini")

