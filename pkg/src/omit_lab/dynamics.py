"""Time-domain mean-field integration and sideband demodulation.

These routines are an independent check on the frequency-domain formulas in
:mod:`omit_lab.response`. Three equation sets are integrated with noise set to
its zero mean:

* the slowly varying sideband envelopes (cheap; no optical or mechanical carrier),
* the linearized fluctuation equations in the pump frame (carrier at ~omega_m),
* the full nonlinear equations in the pump frame.
"""
from __future__ import annotations

import cmath
import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConditioningError, InstabilityError, InvalidParameterError, StiffnessError
from .params import DriveParams, SystemParams
from .response import sideband_matrix, sideband_sources
from .steady import SteadyState, solve_steady_state


@dataclass(frozen=True)
class IntegratorControls:
    method: str = "DOP853"
    rtol: float = 1e-10
    atol: float | None = None
    samples: int = 2001
    sample_start: float | None = None
    settle_factor: float = 30.0
    max_step: float = np.inf


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.a) == len(self.b) == len(self.c) == n):
            raise InvalidParameterError("trajectory arrays must have equal length")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise InvalidParameterError("trajectory times must be strictly increasing")
        for arr in (self.times, self.a, self.b, self.c):
            arr.flags.writeable = False

    def component(self, name):
        return {"a": self.a, "b": self.b, "c": self.c}[name]

    def final(self):
        return np.array([self.a[-1], self.b[-1], self.c[-1]])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "re_a", "im_a", "re_b", "im_b", "re_c", "im_c"])
            for row in zip(self.times, self.a, self.b, self.c):
                t, a, b, c = row
                w.writerow([f"{x:.17g}" for x in (t, a.real, a.imag, b.real, b.imag, c.real, c.imag)])


@dataclass(frozen=True)
class DemodResult:
    amplitude_plus: complex
    amplitude_minus: complex
    offset: complex
    fit_residual: float
    window: tuple
    settled: bool


def _rates(eigenvalues):
    re = np.real(eigenvalues)
    if np.any(re >= 0):
        raise InstabilityError(
            f"linearized dynamics are not damped (max Re eigenvalue {re.max():.6g} s^-1); "
            "steady state is unstable for these parameters"
        )
    return -re


def envelope_decay_rate(sys: SystemParams, ss: SteadyState):
    """Slowest decay rate of the sideband envelope equations (independent of delta)."""
    return float(_rates(np.linalg.eigvals(sideband_matrix(sys, ss, sys.omega_b))).min())


def fluctuation_jacobian(sys: SystemParams, ss: SteadyState, counter_rotating=True):
    """6x6 generator of the pump-frame fluctuations on the basis (x, conj x)."""
    G = ss.G_om
    A11 = np.array(
        [
            [-(1j * ss.Delta_a_prime + sys.kappa_a / 2), 1j * G, 0],
            [1j * G.conjugate(), -(1j * sys.omega_b + sys.gamma_b / 2), 1j * sys.J],
            [0, 1j * sys.J, -(1j * sys.omega_c + sys.gamma_c / 2)],
        ],
        dtype=complex,
    )
    A12 = np.zeros((3, 3), dtype=complex)
    if counter_rotating:
        A12[0, 1] = 1j * G
        A12[1, 0] = 1j * G
    return np.block([[A11, A12], [A12.conj(), A11.conj()]])


def fluctuation_decay_rate(sys: SystemParams, ss: SteadyState, counter_rotating=True):
    return float(_rates(np.linalg.eigvals(fluctuation_jacobian(sys, ss, counter_rotating))).min())


def two_sideband_response(sys: SystemParams, ss: SteadyState, drive: DriveParams):
    """Exact e^{-i delta t} amplitudes of the linearized fluctuations.

    Unlike the envelope equations this keeps the counter-rotating couplings
    (da to conj db and db to conj da), so it is the steady state that a
    faithful integration of the pump-frame linearized equations converges to.
    """
    if not drive.drive_locked:
        raise InvalidParameterError("two-sideband response needs the drive at the probe frequency")
    A = fluctuation_jacobian(sys, ss, counter_rotating=True)
    F = np.zeros(6, dtype=complex)
    F[:3] = sideband_sources(drive)
    X = np.linalg.solve(-1j * drive.delta * np.eye(6) - A, F)
    return complex(X[0]), complex(X[1]), complex(X[2])


def _default_atol(controls, scale, y0):
    if controls.atol is not None:
        return controls.atol
    # with every source off the state size is set by y0, or there is no scale at all
    scale = max(scale, float(np.max(np.abs(y0)))) or 1.0
    return controls.rtol * 1e-6 * scale


def _run(rhs, t_end, y0, controls, name, scale, events=None):
    if t_end <= 0:
        raise InvalidParameterError("t_end must be positive")
    start = 0.0 if controls.sample_start is None else controls.sample_start
    if not 0 <= start < t_end:
        raise InvalidParameterError("sample_start must lie in [0, t_end)")
    t_eval = np.linspace(start, t_end, controls.samples)
    # trial steps that overflow are rejected by the step controller
    with np.errstate(over="ignore", invalid="ignore"):
        sol = solve_ivp(
            rhs,
            (0.0, t_end),
            np.asarray(y0, dtype=complex),
            method=controls.method,
            t_eval=t_eval,
            rtol=controls.rtol,
            atol=_default_atol(controls, scale, y0),
            max_step=controls.max_step,
            events=events,
        )
    if sol.status == 1:
        raise InstabilityError(f"{name}: amplitude diverged at t={sol.t_events[0][0]:.6g} s")
    if sol.status != 0:
        raise StiffnessError(
            f"{name}: integration failed ({sol.message}); "
            "for long settling runs use integrate_slow_envelope"
        )
    y = sol.y
    if not np.all(np.isfinite(y)):
        raise InstabilityError(f"{name}: non-finite samples")
    meta = {
        "integrator": controls.method,
        "rtol": controls.rtol,
        "atol": _default_atol(controls, scale, y0),
        "t_end": t_end,
        "y0": tuple(complex(v) for v in np.asarray(y0, dtype=complex)),
        "nfev": int(sol.nfev),
        "equations": name,
    }
    return Trajectory(times=sol.t, a=y[0], b=y[1], c=y[2], meta=meta)


def _drive_scale(sys, drive):
    return max(drive.epsilon_pr, drive.epsilon_d) / sys.kappa_a


def integrate_slow_envelope(sys, ss, drive, t_end=None, controls=IntegratorControls(rtol=1e-12), y0=None):
    """Integrate the rotating-frame sideband envelopes (da_+, db_+, dc_+).

    Sources are constant when the mechanical drive sits at the probe beat
    note; otherwise the drive term carries exp(-i (omega_d - delta) t).
    ``t_end=None`` uses ``settle_factor`` slowest decay times.
    """
    M = sideband_matrix(sys, ss, drive.delta)
    rate = float(_rates(np.linalg.eigvals(M)).min())
    if t_end is None:
        t_end = controls.settle_factor / rate
    f = sideband_sources(drive)
    if drive.drive_locked:

        def rhs(t, y):
            return M @ y + f

    else:
        detune = drive.omega_d - drive.delta
        fc = drive.epsilon_d * cmath.exp(-1j * drive.phi_d)
        f = f.copy()
        f[2] = 0

        def rhs(t, y):
            out = M @ y + f
            out[2] += fc * cmath.exp(-1j * detune * t)
            return out

    y0 = np.zeros(3, dtype=complex) if y0 is None else y0
    return _run(rhs, t_end, y0, controls, "slow-envelope", _drive_scale(sys, drive))


def integrate_linearized(
    sys, ss, drive, t_end=None, controls=IntegratorControls(), y0=None, counter_rotating=True
):
    """Integrate the pump-frame linearized fluctuation equations (da, db, dc).

    ``counter_rotating=False`` drops the da-conj(db) and db-conj(da) couplings,
    which is the approximation behind the envelope equations.
    """
    rate = fluctuation_decay_rate(sys, ss, counter_rotating)
    if t_end is None:
        t_end = controls.settle_factor / rate
    G = ss.G_om
    Gc = G.conjugate()
    cr = 1.0 if counter_rotating else 0.0
    ka = -(1j * ss.Delta_a_prime + sys.kappa_a / 2)
    kb = -(1j * sys.omega_b + sys.gamma_b / 2)
    kc = -(1j * sys.omega_c + sys.gamma_c / 2)
    J = sys.J
    pr = drive.epsilon_pr * cmath.exp(-1j * drive.phi_p)
    md = drive.epsilon_d * cmath.exp(-1j * drive.phi_d)
    delta = drive.delta
    wd = drive.drive_frequency

    def rhs(t, y):
        da, db, dc = y
        return np.array(
            [
                ka * da + 1j * G * (db + cr * db.conjugate()) + pr * cmath.exp(-1j * delta * t),
                kb * db + 1j * (Gc * da + cr * G * da.conjugate()) + 1j * J * dc,
                kc * dc + 1j * J * db + md * cmath.exp(-1j * wd * t),
            ]
        )

    y0 = np.zeros(3, dtype=complex) if y0 is None else y0
    name = "linearized" if counter_rotating else "linearized-rwa"
    return _run(rhs, t_end, y0, controls, name, _drive_scale(sys, drive))


def integrate_nonlinear(sys, drive, t_end=None, controls=IntegratorControls(rtol=1e-12), y0=None):
    """Integrate the full nonlinear mean-field equations in the pump frame.

    The pump amplitude is real, so results compare with the ``raw`` gauge
    steady state. Aborts with :class:`InstabilityError` when |a| exceeds 1e6
    times its steady value.
    """
    ss = solve_steady_state(sys, drive, gauge="raw")
    Delta_a = ss.Delta_a
    if t_end is None:
        t_end = controls.settle_factor / fluctuation_decay_rate(sys, ss)
    g = sys.g_om
    J = sys.J
    ka = -(1j * Delta_a + sys.kappa_a / 2)
    kb = -(1j * sys.omega_b + sys.gamma_b / 2)
    kc = -(1j * sys.omega_c + sys.gamma_c / 2)
    pu = drive.epsilon_pu
    pr = drive.epsilon_pr * cmath.exp(-1j * drive.phi_p)
    md = drive.epsilon_d * cmath.exp(-1j * drive.phi_d)
    delta = drive.delta
    wd = drive.drive_frequency

    def rhs(t, y):
        a, b, c = y
        return np.array(
            [
                ka * a + 1j * g * a * (b.conjugate() + b).real + pu + pr * cmath.exp(-1j * delta * t),
                kb * b + 1j * g * (a.real**2 + a.imag**2) + 1j * J * c,
                kc * c + 1j * J * b + md * cmath.exp(-1j * wd * t),
            ]
        )

    y0 = np.zeros(3, dtype=complex) if y0 is None else np.asarray(y0, dtype=complex)
    size = max(abs(ss.a_s), drive.epsilon_pu / sys.kappa_a, float(np.max(np.abs(y0)))) or 1.0
    limit = 1e6 * size

    def blowup(t, y):
        return limit - abs(y[0])

    blowup.terminal = True
    scale = max(abs(ss.a_s), abs(ss.b_s), abs(ss.c_s), _drive_scale(sys, drive))
    traj = _run(rhs, t_end, y0, controls, "nonlinear", scale, events=blowup)
    traj.meta["steady_state"] = ss
    return traj


def demodulate(traj: Trajectory, delta, window=None, component="a", threshold=1e-6):
    """Least-squares fit of c_+ e^{-i delta t} + c_- e^{+i delta t} + c_0.

    At ``delta == 0`` the three basis functions coincide and only the constant
    is fitted; it is reported as ``amplitude_plus``.
    """
    t_all = traj.times
    if window is None:
        window = (float(t_all[0]), float(t_all[-1]))
    t0, t1 = window
    if not (t_all[0] <= t0 < t1 <= t_all[-1]):
        raise InvalidParameterError(f"window {window} outside trajectory span")
    mask = (t_all >= t0) & (t_all <= t1)
    t = t_all[mask]
    y = traj.component(component)[mask]
    if delta == 0:
        basis = np.ones((t.size, 1), dtype=complex)
    else:
        if abs(delta) * (t1 - t0) < 5 * 2 * np.pi:
            raise ConditioningError("demodulation window shorter than 5 periods of delta")
        basis = np.column_stack([np.exp(-1j * delta * t), np.exp(1j * delta * t), np.ones_like(t, dtype=complex)])
    if t.size < 2 * basis.shape[1] or np.linalg.cond(basis) > 1e8:
        raise ConditioningError("demodulation fit is ill-conditioned; use more samples or a longer window")
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    norm = np.linalg.norm(y)
    resid = float(np.linalg.norm(y - basis @ coef) / norm) if norm > 0 else 0.0
    if delta == 0:
        plus, minus, offset = coef[0], 0j, coef[0]
    else:
        plus, minus, offset = coef
    return DemodResult(
        amplitude_plus=complex(plus),
        amplitude_minus=complex(minus),
        offset=complex(offset),
        fit_residual=resid,
        window=(t0, t1),
        settled=resid <= threshold,
    )
