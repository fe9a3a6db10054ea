"""Cross-checks between the closed forms, linear solves and time integration.

Used by ``omit-lab verify`` and by the test suite. Each check returns a
:class:`CheckResult` carrying the maximum relative error it observed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    IntegratorControls,
    demodulate,
    fluctuation_decay_rate,
    integrate_linearized,
    integrate_nonlinear,
    integrate_slow_envelope,
    two_sideband_response,
)
from .params import DriveParams, SystemParams
from .response import sideband_closed_form, sideband_linear_solve
from .steady import solve_steady_state


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_rel_error: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self):
        return self.max_rel_error <= self.tolerance

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name:<34s} max_rel_err={self.max_rel_error:.3e}  tol={self.tolerance:.0e}{extra}"


def _rel(x, ref):
    x, ref = np.asarray(x, dtype=complex), np.asarray(ref, dtype=complex)
    return float(np.linalg.norm(x - ref) / np.linalg.norm(ref))


def random_case(rng: np.random.Generator):
    """One valid (system, steady state, drive) triple with a red-detuned pump.

    Rates are drawn log-uniformly around optomechanical scales and the probe
    beat note lands within 0.7 omega_b of the mechanical resonance.
    """
    wb = rng.uniform(0.5e6, 2e7)
    sys = SystemParams(
        omega_a=1.2e15,
        omega_b=wb,
        omega_c=wb * rng.uniform(0.8, 1.2),
        kappa_a=wb * 10 ** rng.uniform(-2, 0.5),
        gamma_b=wb * 10 ** rng.uniform(-6, -2),
        gamma_c=wb * 10 ** rng.uniform(-6, -2),
        g_om=10 ** rng.uniform(0, 2),
        J=wb * rng.uniform(0, 0.5),
    )
    n = 10 ** rng.uniform(4, 9)
    Delta_eff = wb * rng.uniform(0.7, 1.3)
    eps_pu = math.sqrt(n * (Delta_eff**2 + sys.kappa_a**2 / 4))
    drive = DriveParams(
        epsilon_pu=eps_pu,
        epsilon_pr=eps_pu * 10 ** rng.uniform(-5, -2),
        delta=wb * (1 + rng.uniform(-0.7, 0.7)),
        phi_p=rng.uniform(0, 2 * math.pi),
        Delta_a_eff=Delta_eff,
    ).with_eta_phi(rng.uniform(0, 2), rng.uniform(0, 2 * math.pi))
    ss = solve_steady_state(sys, drive, gauge=["real-G", "raw"][int(rng.integers(2))])
    return sys, ss, drive


def closed_form_vs_solve(draws=1000, seed=0, tol=1e-10):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(draws):
        sys, ss, drive = random_case(rng)
        cf = sideband_closed_form(sys, ss, drive)
        ls = sideband_linear_solve(sys, ss, drive)[0]
        worst = max(worst, abs(cf - ls) / abs(ls))
    return CheckResult("closed form vs linear solve", worst, tol, f"{draws} draws, seed {seed}")


def default_case():
    """Reference device with a unit-ratio in-phase mechanical drive."""
    from .sweep import figure_preset

    sc = figure_preset("fig3a")
    return sc.system, sc.drive


def envelope_check(sys=None, drive=None, tol=1e-8):
    """Envelope integration settles onto the stationary sideband solution."""
    if sys is None:
        sys, drive = default_case()
    ss = solve_steady_state(sys, drive)
    # 1e-10 integrator tolerance leaves ~1e-11 error, well inside 1e-8
    ctl = IntegratorControls(rtol=1e-10, samples=2)
    worst = 0.0
    for frac in (0.0, 0.5, -0.5, 1.0, -1.0):
        d = drive.replace(delta=sys.omega_m + frac * sys.J)
        traj = integrate_slow_envelope(sys, ss, d, controls=ctl)
        worst = max(worst, _rel(traj.final(), sideband_linear_solve(sys, ss, d)))
    return CheckResult("envelope vs stationary solve", worst, tol, "5 detunings")


def _full_frame(sys, drive, counter_rotating):
    ssr = solve_steady_state(sys, drive, gauge="raw")
    d = drive.replace(delta=sys.omega_m)
    t_end = 30 / fluctuation_decay_rate(sys, ssr, counter_rotating)
    window = 50 * 2 * math.pi / d.delta
    ctl = IntegratorControls(rtol=1e-10, sample_start=t_end - window, samples=4001)
    traj = integrate_linearized(sys, ssr, d, t_end=t_end, controls=ctl, counter_rotating=counter_rotating)
    return ssr, d, demodulate(traj, d.delta)


def full_frame_checks(sys=None, drive=None, tol=1e-3):
    """Pump-frame linearized integration at delta = omega_m, demodulated.

    Returns the comparison against the closed form (which omits the
    counter-rotating couplings) and against the exact two-sideband solve.
    """
    if sys is None:
        sys, drive = default_case()
    ssr, d, dm = _full_frame(sys, drive, counter_rotating=True)
    cf = sideband_closed_form(sys, ssr, d)
    ts = two_sideband_response(sys, ssr, d)[0]
    return [
        CheckResult("full frame vs closed form", abs(dm.amplitude_plus - cf) / abs(cf), tol, "delta = omega_m"),
        CheckResult("full frame vs two-sideband solve", abs(dm.amplitude_plus - ts) / abs(ts), tol, "delta = omega_m"),
    ]


def nonlinear_check(sys=None, drive=None, tol=1e-9):
    """Probe-off nonlinear integration relaxes onto the steady state."""
    if sys is None:
        sys, drive = default_case()
    d = drive.replace(epsilon_pr=0.0, epsilon_d=0.0)
    traj = integrate_nonlinear(sys, d)
    ss = traj.meta["steady_state"]
    err = _rel(traj.final(), [ss.a_s, ss.b_s, ss.c_s])
    return CheckResult("nonlinear vs steady state", err, tol, "probe off")
