"""Detuning spectra, 2-D parameter grids, spectral features and figure presets."""
from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import GridPointError, InsufficientDataError, InvalidParameterError, OmitError
from .params import DriveParams, SystemParams
from .response import response
from .steady import SolverControls, SteadyState, solve_steady_state

THREADS_ENV = "OMIT_LAB_THREADS"

# device numbers as value/2pi in Hz
REFERENCE_SYSTEM_HZ = {
    "omega_a": 194e12,
    "omega_b": 947e3,
    "omega_c": 947e3,
    "kappa_a": 215e3,
    "gamma_b": 140.0,
    "gamma_c": 140.0,
    "g_om": 2.7,
    "J": 320e3,
}
REFERENCE_PUMP_POWER_MW = 1.0
DEFAULT_PROBE_RATIO = 1e-3
DEFAULT_ETA_VALUES = tuple(0.25 * k for k in range(9))


@dataclass(frozen=True)
class AxisSpec:
    """Normalized detuning grid (delta - omega_m) / omega_m."""

    start: float = -0.7
    stop: float = 0.7
    count: int = 2001

    def __post_init__(self):
        if self.count < 2:
            raise InvalidParameterError("axis count must be at least 2")
        if not self.stop > self.start:
            raise InvalidParameterError("axis stop must exceed start")

    def values(self):
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class SecondAxis:
    kind: str
    values: tuple

    def __post_init__(self):
        if self.kind not in ("eta", "phi"):
            raise InvalidParameterError(f"second axis kind must be 'eta' or 'phi', got {self.kind!r}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise InvalidParameterError("second axis needs at least one value")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidParameterError("second axis values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @property
    def unit(self):
        return "dimensionless" if self.kind == "eta" else "rad"


@dataclass(frozen=True)
class Scenario:
    """Everything needed to regenerate one spectrum or grid."""

    name: str
    system: SystemParams
    drive: DriveParams
    axis: AxisSpec = AxisSpec()
    second_axis: SecondAxis | None = None
    gauge: str = "real-G"
    solver: SolverControls = SolverControls()


@dataclass(frozen=True)
class SpectrumTable:
    axis: np.ndarray
    rows: tuple
    system: SystemParams | None = None
    drive: DriveParams | None = None
    steady: SteadyState | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.axis) != len(self.rows):
            raise InvalidParameterError("row count must equal axis length")
        if len(self.axis) > 1 and not np.all(np.diff(self.axis) > 0):
            raise InvalidParameterError("axis must be strictly increasing")

    @property
    def eps_T(self):
        return np.array([r.eps_T for r in self.rows])

    @property
    def absorption(self):
        return self.eps_T.real

    @property
    def dispersion(self):
        return self.eps_T.imag

    @property
    def T_pr(self):
        return np.array([r.T_pr for r in self.rows])


@dataclass(frozen=True)
class SweepGrid:
    axis: np.ndarray
    second_axis: SecondAxis
    rows: tuple  # one tuple of Response per second-axis value
    system: SystemParams | None = None
    drive: DriveParams | None = None
    steady: SteadyState | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def eps_T(self):
        return np.array([[r.eps_T for r in row] for row in self.rows])

    @property
    def absorption(self):
        return self.eps_T.real

    def row_table(self, k):
        return SpectrumTable(self.axis, self.rows[k], self.system, self._drive_for(k), self.steady)

    def _drive_for(self, k):
        if self.drive is None:
            return None
        return _second_axis_drive(self.drive, self.second_axis.kind, self.second_axis.values[k])


@dataclass(frozen=True)
class FeatureReport:
    minima: tuple  # (position, depth) pairs sorted by position
    splitting: float
    on_resonance_absorption: float | None

    @property
    def positions(self):
        return tuple(p for p, _ in self.minima)


def thread_count(workers=None):
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InvalidParameterError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
    return min(8, os.cpu_count() or 1)


def _map_indexed(fn, n, workers):
    """Evaluate ``fn(i)`` for i < n; results are always in index order."""
    nthreads = thread_count(workers)

    def guarded(i):
        try:
            return fn(i)
        except OmitError as exc:
            raise GridPointError(i, exc) from exc

    if nthreads == 1 or n < 64:
        return [guarded(i) for i in range(n)]
    chunks = [range(k, min(n, k + math.ceil(n / nthreads))) for k in range(0, n, math.ceil(n / nthreads))]
    with ThreadPoolExecutor(max_workers=nthreads) as pool:
        parts = list(pool.map(lambda rng: [guarded(i) for i in rng], chunks))
    return [r for part in parts for r in part]


def _deltas(sys, axis_values):
    wm = sys.omega_m
    return [wm + wm * float(x) for x in axis_values]


def _second_axis_drive(drive, kind, value):
    if kind == "eta":
        return drive.with_eta_phi(value, drive.phi)
    return drive.with_eta_phi(drive.eta or 0.0, value)


def provenance_block(scenario: Scenario, ss: SteadyState):
    def cplx(z):
        return [z.real, z.imag]

    return {
        "artifact_version": __version__,
        "scenario": scenario_to_dict(scenario),
        "steady_state": {
            "a_s": cplx(ss.a_s),
            "b_s": cplx(ss.b_s),
            "c_s": cplx(ss.c_s),
            "Delta_a": ss.Delta_a,
            "Delta_a_prime": ss.Delta_a_prime,
            "G_om": cplx(ss.G_om),
            "gauge": ss.gauge,
            "residual": ss.residual,
            "relative_residual": ss.relative_residual,
            "multistable": ss.multistable,
            "method": ss.method,
        },
    }


def scenario_to_dict(scenario: Scenario):
    return {
        "name": scenario.name,
        "system": dataclasses.asdict(scenario.system),
        "drive": dataclasses.asdict(scenario.drive),
        "axis": dataclasses.asdict(scenario.axis),
        "second_axis": None
        if scenario.second_axis is None
        else {"kind": scenario.second_axis.kind, "values": list(scenario.second_axis.values)},
        "gauge": scenario.gauge,
        "solver": dataclasses.asdict(scenario.solver),
    }


def scenario_from_dict(d) -> Scenario:
    second = d.get("second_axis")
    return Scenario(
        name=d["name"],
        system=SystemParams(**d["system"]),
        drive=DriveParams(**d["drive"]),
        axis=AxisSpec(**d["axis"]),
        second_axis=None if second is None else SecondAxis(second["kind"], tuple(second["values"])),
        gauge=d["gauge"],
        solver=SolverControls(**d["solver"]),
    )


def sweep_detuning(sys: SystemParams, drive: DriveParams, axis: AxisSpec, gauge="real-G",
                   ss: SteadyState | None = None, workers=None, solver=SolverControls(),
                   name="custom") -> SpectrumTable:
    """Evaluate the response over the normalized detuning grid.

    The steady state does not depend on the probe detuning and is solved once.
    """
    if ss is None:
        ss = solve_steady_state(sys, drive, gauge=gauge, controls=solver)
    x = axis.values()
    deltas = _deltas(sys, x)
    rows = _map_indexed(lambda i: response(sys, ss, dataclasses.replace(drive, delta=deltas[i])), len(x), workers)
    scenario = Scenario(name, sys, drive, axis, None, gauge, solver)
    return SpectrumTable(x, tuple(rows), sys, drive, ss, provenance_block(scenario, ss))


def sweep_2d(sys: SystemParams, drive: DriveParams, axis: AxisSpec, second: SecondAxis, gauge="real-G",
             ss: SteadyState | None = None, workers=None, solver=SolverControls(),
             name="custom") -> SweepGrid:
    """Rectangular grid: one detuning spectrum per value of eta or phi."""
    if second.kind == "eta" and drive.epsilon_pr <= 0:
        raise InvalidParameterError("an eta axis needs a positive probe amplitude")
    if ss is None:
        ss = solve_steady_state(sys, drive, gauge=gauge, controls=solver)
    x = axis.values()
    deltas = _deltas(sys, x)
    drives = [_second_axis_drive(drive, second.kind, v) for v in second.values]
    n = len(x)

    def point(k):
        j, i = divmod(k, n)
        return response(sys, ss, dataclasses.replace(drives[j], delta=deltas[i]))

    flat = _map_indexed(point, n * len(drives), workers)
    rows = tuple(tuple(flat[j * n:(j + 1) * n]) for j in range(len(drives)))
    scenario = Scenario(name, sys, drive, axis, second, gauge, solver)
    return SweepGrid(x, second, rows, sys, drive, ss, provenance_block(scenario, ss))


def run_scenario(scenario: Scenario, workers=None):
    if scenario.second_axis is None:
        return sweep_detuning(scenario.system, scenario.drive, scenario.axis, scenario.gauge,
                              workers=workers, solver=scenario.solver, name=scenario.name)
    return sweep_2d(scenario.system, scenario.drive, scenario.axis, scenario.second_axis,
                    scenario.gauge, workers=workers, solver=scenario.solver, name=scenario.name)


def find_minima(axis, values):
    """Local minima by three-point comparison with parabolic refinement.

    A plateau reports its lowest-index sample.
    """
    axis = np.asarray(axis, dtype=float)
    y = np.asarray(values, dtype=float)
    if y.size < 3:
        raise InsufficientDataError("need at least 3 samples to locate minima")
    found = []
    for i in range(1, y.size - 1):
        if y[i] < y[i - 1] and y[i] <= y[i + 1]:
            x0, x1, x2 = axis[i - 1], axis[i], axis[i + 1]
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
            den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
            if den == 0:
                found.append((float(x1), float(y1)))
                continue
            xv = x1 - 0.5 * num / den
            # value of the interpolating parabola at its vertex
            d01 = (y1 - y0) / (x1 - x0)
            d12 = (y2 - y1) / (x2 - x1)
            curv = (d12 - d01) / (x2 - x0)
            yv = y1 + d01 * (xv - x1) + curv * (xv - x0) * (xv - x1)
            found.append((float(xv), float(yv)))
    return tuple(found)


def find_features(table: SpectrumTable) -> FeatureReport:
    minima = find_minima(table.axis, table.absorption)
    deepest = sorted(minima, key=lambda m: m[1])[:2]
    splitting = abs(deepest[0][0] - deepest[1][0]) if len(deepest) == 2 else 0.0
    on_res = None
    if table.system is not None and table.steady is not None and table.drive is not None:
        on_res = response(table.system, table.steady, table.drive.replace(delta=table.system.omega_m)).absorption
    return FeatureReport(minima=minima, splitting=splitting, on_resonance_absorption=on_res)


def reference_scenario(name, *, J_hz=REFERENCE_SYSTEM_HZ["J"], eta=0.0, phi_over_pi=0.0,
                   pump_power_mw=REFERENCE_PUMP_POWER_MW, probe_ratio=DEFAULT_PROBE_RATIO,
                   axis=AxisSpec(), second_axis=None):
    """Device of the reference optomechanical setup, pumped on the red sideband."""
    hz = dict(REFERENCE_SYSTEM_HZ, J=J_hz)
    sys = SystemParams.from_hz(**hz)
    base = DriveParams.from_power(sys, pump_power_mw * 1e-3, Delta_a_eff=sys.omega_b)
    drive = base.replace(epsilon_pr=probe_ratio * base.epsilon_pu).with_eta_phi(eta, phi_over_pi * math.pi)
    return Scenario(name, sys, drive, axis, second_axis)


FIGURE_IDS = ("fig2a", "fig2b", "fig3a", "fig3b", "fig3c", "fig3d", "fig5", "fig6")


def figure_preset(fig_id) -> Scenario:
    if fig_id == "fig2a":
        return reference_scenario(fig_id)
    if fig_id == "fig2b":
        return reference_scenario(fig_id, J_hz=0.0)
    phases = {"fig3a": 0.0, "fig3b": 0.5, "fig3c": 1.0, "fig3d": 1.5}
    if fig_id in phases:
        return reference_scenario(fig_id, eta=1.0, phi_over_pi=phases[fig_id])
    if fig_id in ("fig5", "fig6"):
        return reference_scenario(
            fig_id,
            phi_over_pi=0.0 if fig_id == "fig5" else 1.0,
            second_axis=SecondAxis("eta", DEFAULT_ETA_VALUES),
        )
    raise InvalidParameterError(f"unknown figure id {fig_id!r}; expected one of {FIGURE_IDS}")
