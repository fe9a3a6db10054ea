"""Classical pump-only steady state of the cavity and the two resonators."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from scipy.optimize import brentq

from .errors import ConvergenceError, InvalidParameterError, SolverInternalError
from .params import DriveParams, SystemParams

GAUGES = ("real-G", "raw")


@dataclass(frozen=True)
class SolverControls:
    damping: float = 0.5
    rtol: float = 1e-14
    max_iter: int = 500
    fallback: bool = True


@dataclass(frozen=True)
class SteadyState:
    a_s: complex
    b_s: complex
    c_s: complex
    Delta_a: float
    Delta_a_prime: float
    G_om: complex
    gauge: str
    residual: float
    relative_residual: float
    rotation: float = 0.0
    multistable: bool = False
    iterations: int = 0
    method: str = "explicit"

    @property
    def photon_number(self):
        return abs(self.a_s) ** 2

    @property
    def frequency_shift(self):
        """Radiation-pressure shift Delta_a - Delta_a_prime."""
        return self.Delta_a - self.Delta_a_prime

    def accepted(self, sys: SystemParams, epsilon_pu):
        scale = max(abs(self.a_s) * sys.kappa_a, epsilon_pu)
        return self.residual <= 1e-12 * scale


def _mechanical_susceptibility(sys):
    # b_s = g |a_s|^2 * chi after eliminating c_s
    Q = 1j * sys.omega_b + sys.gamma_b / 2 + sys.J**2 / (1j * sys.omega_c + sys.gamma_c / 2)
    return 1j / Q


def steady_state_residuals(sys, epsilon_pu, Delta_a, a_s, b_s, c_s):
    """Residuals of the three pump-only steady-state equations.

    Returns ``(absolute, relative)`` max norms, where each relative residual is
    divided by the largest term in its own equation.
    """
    Delta_p = Delta_a - sys.g_om * (b_s.conjugate() + b_s).real
    lhs_a = a_s * (1j * Delta_p + sys.kappa_a / 2)
    lhs_b = b_s * (1j * sys.omega_b + sys.gamma_b / 2)
    src_b = 1j * sys.g_om * abs(a_s) ** 2
    cpl_b = 1j * sys.J * c_s
    lhs_c = c_s * (1j * sys.omega_c + sys.gamma_c / 2)
    cpl_c = 1j * sys.J * b_s
    rows = [
        (lhs_a - epsilon_pu, (abs(lhs_a), epsilon_pu)),
        (lhs_b - src_b - cpl_b, (abs(lhs_b), abs(src_b), abs(cpl_b))),
        (lhs_c - cpl_c, (abs(lhs_c), abs(cpl_c))),
    ]
    absolute = max(abs(r) for r, _ in rows)
    relative = 0.0
    for r, terms in rows:
        scale = max(terms)
        if scale > 0:
            relative = max(relative, abs(r) / scale)
    return absolute, relative


def _cubic_roots(eps2, Delta, k, kappa, upper):
    """Positive roots of n((Delta - k n)^2 + kappa^2/4) - eps2 on (0, upper]."""

    def f(n):
        return n * ((Delta - k * n) ** 2 + kappa**2 / 4) - eps2

    # monotone pieces split at the critical points of the cubic
    breaks = [0.0]
    disc = 16 * Delta**2 * k**2 - 12 * k**2 * (Delta**2 + kappa**2 / 4)
    if disc > 0:
        sq = math.sqrt(disc)
        for crit in sorted(((4 * Delta * k - sq) / (6 * k**2), (4 * Delta * k + sq) / (6 * k**2))):
            if 0 < crit < upper:
                breaks.append(crit)
    breaks.append(upper)
    roots = []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        flo, fhi = f(lo), f(hi)
        if flo == 0:
            if lo > 0:
                roots.append(lo)
            continue
        if flo * fhi < 0:
            roots.append(brentq(f, lo, hi, xtol=1e-300, rtol=8.9e-16, maxiter=500))
        elif fhi == 0:
            roots.append(hi)
    return sorted(set(roots))


def _fixed_point(eps2, Delta, k, kappa, controls):
    n = eps2 / (Delta**2 + kappa**2 / 4)
    beta = controls.damping
    for it in range(1, controls.max_iter + 1):
        target = eps2 / ((Delta - k * n) ** 2 + kappa**2 / 4)
        n_new = (1 - beta) * n + beta * target
        if abs(n_new - n) <= controls.rtol * abs(n_new):
            return n_new, it, True
        n = n_new
    return n, controls.max_iter, False


def solve_steady_state(sys: SystemParams, drive: DriveParams, gauge="real-G", controls=SolverControls()):
    """Pump-only steady state (a_s, b_s, c_s) and the effective detuning.

    With ``drive.Delta_a_eff`` the effective detuning is fixed, which makes the
    solution explicit and yields the bare detuning as output. With
    ``drive.Delta_a`` the photon number solves a self-consistent equation:
    damped fixed-point iteration first, bracketed root-finding on the
    equivalent cubic as fallback and for multistability detection. The
    returned branch is the lowest-photon-number root, which is the one
    connected to the zero-power solution.
    """
    if gauge not in GAUGES:
        raise InvalidParameterError(f"unknown gauge {gauge!r}; expected one of {GAUGES}")
    eps = drive.epsilon_pu
    kappa = sys.kappa_a
    chi = _mechanical_susceptibility(sys)
    iterations = 0
    multistable = False

    if drive.Delta_a_eff is not None:
        Delta_p = drive.Delta_a_eff
        n = eps**2 / (Delta_p**2 + kappa**2 / 4)
        b_s = sys.g_om * n * chi
        c_s = 1j * sys.J * b_s / (1j * sys.omega_c + sys.gamma_c / 2)
        Delta_a = Delta_p + 2 * sys.g_om * b_s.real
        method = "explicit"
    else:
        Delta_a = drive.Delta_a
        k = 2 * sys.g_om**2 * chi.real
        eps2 = eps**2
        if eps == 0:
            n, method = 0.0, "explicit"
        elif k == 0:
            n, method = eps2 / (Delta_a**2 + kappa**2 / 4), "explicit"
        else:
            n_fp, iterations, converged = _fixed_point(eps2, Delta_a, k, kappa, controls)
            if not converged and not controls.fallback:
                last = abs(eps2 / ((Delta_a - k * n_fp) ** 2 + kappa**2 / 4) - n_fp)
                raise ConvergenceError(
                    f"steady-state iteration did not converge in {controls.max_iter} steps",
                    residual=last,
                    iterations=iterations,
                )
            upper = 4 * eps2 / kappa**2 * (1 + 1e-9)
            roots = _cubic_roots(eps2, Delta_a, k, kappa, upper)
            if not roots:
                raise SolverInternalError("no positive photon-number root found in the physical bracket")
            multistable = len(roots) > 1
            lowest = roots[0]
            if converged and abs(n_fp - lowest) <= 1e-10 * lowest:
                n, method = n_fp, "fixed-point"
            else:
                n, method = lowest, "bracketed"
        b_s = sys.g_om * n * chi
        c_s = 1j * sys.J * b_s / (1j * sys.omega_c + sys.gamma_c / 2)
        Delta_p = Delta_a - 2 * sys.g_om * b_s.real

    a_s = eps / (1j * Delta_p + kappa / 2)
    residual, rel = steady_state_residuals(sys, eps, Delta_a, a_s, b_s, c_s)

    rotation = 0.0
    if gauge == "real-G" and a_s != 0:
        rotation = -cmath.phase(a_s)
        a_s = complex(abs(a_s), 0.0)
    G_om = sys.g_om * a_s
    return SteadyState(
        a_s=complex(a_s),
        b_s=complex(b_s),
        c_s=complex(c_s),
        Delta_a=float(Delta_a),
        Delta_a_prime=float(Delta_p),
        G_om=complex(G_om),
        gauge=gauge,
        residual=residual,
        relative_residual=rel,
        rotation=rotation,
        multistable=multistable,
        iterations=iterations,
        method=method,
    )
