"""Probe-sideband response: direct solve, closed form, output quadrature, dressed modes."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateModeError,
    InvalidParameterError,
    SingularityError,
    SolverInternalError,
    UndefinedCriticalPointError,
)
from .params import DriveParams, SystemParams
from .steady import SteadyState


@dataclass(frozen=True)
class Response:
    delta: float
    lambda_a: float
    lambda_b: float
    lambda_c: float
    eps_T: complex
    eps_out: complex
    T_pr: complex

    @property
    def lam(self):
        return self.lambda_b

    @property
    def absorption(self):
        return self.eps_T.real

    @property
    def dispersion(self):
        return self.eps_T.imag


@dataclass(frozen=True)
class DressedModes:
    lambda_plus: complex
    lambda_minus: complex
    A_plus: complex
    A_minus: complex
    regime: str


def detunings(sys: SystemParams, ss: SteadyState, delta):
    """(lambda_a, lambda_b, lambda_c) for probe-pump beat ``delta``."""
    return delta - ss.Delta_a_prime, delta - sys.omega_b, delta - sys.omega_c


def _drive_amplitude(drive):
    # a drive off the probe sideband has no component at that frequency
    return drive.epsilon_d if drive.drive_locked else 0.0


def _denominators(sys, ss, delta):
    la, lb, lc = detunings(sys, ss, delta)
    Ba = sys.kappa_a / 2 - 1j * la
    Bb = sys.gamma_b / 2 - 1j * lb
    Bc = sys.gamma_c / 2 - 1j * lc
    D = Bb * Bc + sys.J**2
    den = Ba * D + abs(ss.G_om) ** 2 * Bc
    if den == 0:
        raise SingularityError(f"sideband denominator vanishes at delta={delta!r}")
    return D, den


def sideband_closed_form(sys: SystemParams, ss: SteadyState, drive: DriveParams):
    """Cavity sideband amplitude <delta a_+> from the eliminated closed form."""
    D, den = _denominators(sys, ss, drive.delta)
    eps_d = _drive_amplitude(drive)
    numer = -ss.G_om * sys.J * eps_d * cmath.exp(-1j * drive.phi) + D * drive.epsilon_pr
    return cmath.exp(-1j * drive.phi_p) * numer / den


def sideband_matrix(sys: SystemParams, ss: SteadyState, delta):
    """Coefficient matrix of the three sideband equations (d/dt x = M x + f)."""
    la, lb, lc = detunings(sys, ss, delta)
    G = ss.G_om
    J = sys.J
    return np.array(
        [
            [1j * la - sys.kappa_a / 2, 1j * G, 0.0],
            [1j * G.conjugate(), 1j * lb - sys.gamma_b / 2, 1j * J],
            [0.0, 1j * J, 1j * lc - sys.gamma_c / 2],
        ],
        dtype=complex,
    )


def sideband_sources(drive: DriveParams):
    return np.array(
        [
            drive.epsilon_pr * cmath.exp(-1j * drive.phi_p),
            0.0,
            _drive_amplitude(drive) * cmath.exp(-1j * drive.phi_d),
        ],
        dtype=complex,
    )


def sideband_linear_solve(sys: SystemParams, ss: SteadyState, drive: DriveParams):
    """Solve the stationary sideband equations for (<da_+>, <db_+>, <dc_+>)."""
    M = sideband_matrix(sys, ss, drive.delta)
    f = sideband_sources(drive)
    try:
        x = np.linalg.solve(M, -f)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(f"sideband system is singular at delta={drive.delta!r}") from exc
    if np.linalg.cond(M) > 1e14:
        raise SingularityError(f"sideband system is numerically singular at delta={drive.delta!r}")
    return complex(x[0]), complex(x[1]), complex(x[2])


def quadrature(sys: SystemParams, ss: SteadyState, drive: DriveParams):
    """Output quadrature eps_T, evaluated from its own closed form."""
    if drive.epsilon_pr <= 0:
        raise InvalidParameterError("epsilon_pr must be positive: eps_T is normalized by the probe amplitude")
    D, den = _denominators(sys, ss, drive.delta)
    eta = _drive_amplitude(drive) / drive.epsilon_pr
    return sys.kappa_a * (-ss.G_om * sys.J * eta * cmath.exp(-1j * drive.phi) + D) / den


def response(sys: SystemParams, ss: SteadyState, drive: DriveParams) -> Response:
    eps_T = quadrature(sys, ss, drive)
    probe = drive.epsilon_pr * cmath.exp(-1j * drive.phi_p)
    da = sideband_closed_form(sys, ss, drive)
    la, lb, lc = detunings(sys, ss, drive.delta)
    return Response(
        delta=drive.delta,
        lambda_a=la,
        lambda_b=lb,
        lambda_c=lc,
        eps_T=eps_T,
        eps_out=sys.kappa_a * da - probe,
        T_pr=eps_T - 1,
    )


def dressed_modes(sys: SystemParams, ss: SteadyState, allow_degenerate=False) -> DressedModes:
    """Normal-mode parameters of the coupled mechanical pair and their weights.

    With ``allow_degenerate`` the coincident-mode case J = 0, gamma_b = gamma_c
    returns the limit A_plus = A_minus = |G|^2 / 2. The exceptional point at
    J > 0 has a double pole and no partial-fraction form; it always raises.
    """
    gb = sys.gamma_b / 2
    gc = sys.gamma_c / 2
    radicand = 4 * sys.J**2 - (gb - gc) ** 2
    root = cmath.sqrt(complex(radicand, 0.0))
    lp = (gb + gc + 1j * root) / 2
    lm = (gb + gc - 1j * root) / 2
    G2 = abs(ss.G_om) ** 2
    regime = "underdamped" if radicand > 0 else "overdamped"
    split = lp - lm
    if abs(split) <= 1e-12 * abs(lp + lm):
        if allow_degenerate and sys.J == 0 and sys.gamma_b == sys.gamma_c:
            return DressedModes(lp, lm, G2 / 2, G2 / 2, regime)
        raise DegenerateModeError("dressed modes coincide; partial-fraction weights are undefined")
    return DressedModes(
        lambda_plus=lp,
        lambda_minus=lm,
        A_plus=(lp - gc) / split * G2,
        A_minus=-(lm - gc) / split * G2,
        regime=regime,
    )


def response_no_drive(sys: SystemParams, ss: SteadyState, lam, modes: DressedModes | None = None):
    """eps_T without mechanical drive, in dressed-mode partial fractions."""
    if modes is None:
        modes = dressed_modes(sys, ss)
    x = 1j * lam
    return sys.kappa_a / (
        sys.kappa_a / 2 - x + modes.A_plus / (modes.lambda_plus - x) + modes.A_minus / (modes.lambda_minus - x)
    )


def response_single_omit(sys: SystemParams, ss: SteadyState, lam):
    """eps_T of the cavity coupled to resonator b alone."""
    x = 1j * lam
    return sys.kappa_a / (sys.kappa_a / 2 - x + abs(ss.G_om) ** 2 / (sys.gamma_b / 2 - x))


def _resonant_probe(sys, ss, eta, phi=0.0):
    drive = DriveParams(
        epsilon_pu=1.0, epsilon_pr=1.0, delta=sys.omega_b, Delta_a_eff=ss.Delta_a_prime
    )
    return drive.with_eta_phi(eta, phi)


def _check_critical_preconditions(sys, ss):
    if ss.gauge != "real-G":
        raise InvalidParameterError("critical_eta needs the real-G gauge")
    if abs(ss.G_om) == 0 or sys.J == 0:
        raise UndefinedCriticalPointError("no critical drive ratio when |G_om| = 0 or J = 0")
    scale = sys.omega_b
    if abs(ss.Delta_a_prime - sys.omega_b) > 1e-9 * scale or abs(sys.omega_c - sys.omega_b) > 1e-9 * scale:
        raise InvalidParameterError("critical_eta needs Delta_a' = omega_b = omega_c (all detunings zero on resonance)")


def critical_eta_bisect(sys: SystemParams, ss: SteadyState, rtol=1e-15):
    """Root of Re[eps_T](eta) at delta = omega_b, phi = 0, by bisection."""
    _check_critical_preconditions(sys, ss)

    def f(eta):
        return quadrature(sys, ss, _resonant_probe(sys, ss, eta)).real

    lo, hi = 0.0, 1.0
    f_lo = f(lo)
    if f_lo <= 0:
        raise UndefinedCriticalPointError("Re[eps_T] is not positive without drive")
    while f(hi) > 0:
        lo, hi = hi, 2 * hi
        if hi > 1e30:
            raise UndefinedCriticalPointError("Re[eps_T] does not change sign for any finite eta")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def critical_eta(sys: SystemParams, ss: SteadyState, verify=True):
    """Drive ratio at which on-resonance absorption vanishes for phi = 0.

    The numerator of eps_T at zero detuning is J^2 + gamma_b gamma_c / 4 -
    |G| J eta; the denominator is real and positive there.
    """
    _check_critical_preconditions(sys, ss)
    G = abs(ss.G_om)
    eta_star = (sys.J**2 + sys.gamma_b * sys.gamma_c / 4) / (G * sys.J)
    if verify:
        eta_bis = critical_eta_bisect(sys, ss)
        if not math.isclose(eta_bis, eta_star, rel_tol=1e-8):
            raise SolverInternalError(f"critical eta mismatch: closed form {eta_star!r}, bisection {eta_bis!r}")
    return eta_star
