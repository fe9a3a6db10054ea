"""Device and drive parameter records.

All rates and frequencies are angular (rad/s). Use :func:`SystemParams.from_hz`
when the numbers at hand are quoted as ``value / 2pi`` in Hz.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .errors import InvalidParameterError

HBAR = 1.054571817e-34  # J s, CODATA 2018 exact
TWO_PI = 2.0 * math.pi


def _require_positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")


def _require_nonnegative(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value >= 0):
        raise InvalidParameterError(f"{name} must be a non-negative finite number, got {value!r}")


def pump_amplitude(P, omega, kappa):
    """Input amplitude sqrt(P kappa / (hbar omega)) in s^-1/2 for power ``P`` in W."""
    _require_nonnegative("P", P)
    _require_positive("omega", omega)
    _require_positive("kappa", kappa)
    return math.sqrt(P * kappa / (HBAR * omega))


def derive_g_om(omega_a, L, m, omega_b):
    """Single-photon optomechanical coupling (omega_a / L) sqrt(hbar / (m omega_b))."""
    for name, value in (("omega_a", omega_a), ("L", L), ("m", m), ("omega_b", omega_b)):
        _require_positive(name, value)
    return (omega_a / L) * math.sqrt(HBAR / (m * omega_b))


@dataclass(frozen=True)
class SystemParams:
    """Fixed constants of the cavity and the two mechanical resonators."""

    omega_a: float
    omega_b: float
    omega_c: float
    kappa_a: float
    gamma_b: float
    gamma_c: float
    g_om: float
    J: float
    m: float | None = None
    L: float | None = None

    def __post_init__(self):
        for name in ("omega_a", "omega_b", "omega_c", "kappa_a", "gamma_b", "gamma_c", "g_om"):
            _require_positive(name, getattr(self, name))
        _require_nonnegative("J", self.J)
        if self.m is not None:
            _require_positive("m", self.m)
        if self.L is not None:
            _require_positive("L", self.L)

    @classmethod
    def from_hz(cls, *, omega_a, omega_b, omega_c, kappa_a, gamma_b, gamma_c, g_om, J, m=None, L=None):
        """Build from ``value / 2pi`` numbers in Hz.

        ``g_om=None`` derives the coupling from the mass ``m`` (kg) and
        cavity length ``L`` (m).
        """
        if g_om is None:
            if m is None or L is None:
                raise InvalidParameterError("give g_om, or both m and L")
            g_om = derive_g_om(TWO_PI * omega_a, L, m, TWO_PI * omega_b) / TWO_PI
        return cls(
            omega_a=TWO_PI * omega_a,
            omega_b=TWO_PI * omega_b,
            omega_c=TWO_PI * omega_c,
            kappa_a=TWO_PI * kappa_a,
            gamma_b=TWO_PI * gamma_b,
            gamma_c=TWO_PI * gamma_c,
            g_om=TWO_PI * g_om,
            J=TWO_PI * J,
            m=m,
            L=L,
        )

    @property
    def omega_m(self):
        # normalization frequency for detuning axes
        return self.omega_b

    @property
    def resolved_sideband(self):
        return self.omega_b > 10 * self.kappa_a and self.omega_c > 10 * self.kappa_a

    @property
    def high_Q(self):
        return self.omega_b > 1e3 * self.gamma_b and self.omega_c > 1e3 * self.gamma_c

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class DriveParams:
    """Pump, probe and mechanical drive settings.

    The pump is described by its amplitude ``epsilon_pu`` and its detuning from
    the cavity. Give exactly one of ``Delta_a`` (bare detuning
    ``omega_a - omega_pu``) or ``Delta_a_eff`` (the detuning after the
    radiation-pressure shift, which is what the red-sideband condition fixes).

    ``omega_d=None`` locks the mechanical drive to the probe beat note
    (``omega_d == delta``), which is how spectra are swept.
    """

    epsilon_pu: float
    epsilon_pr: float = 0.0
    delta: float = 0.0
    phi_p: float = 0.0
    epsilon_d: float = 0.0
    phi_d: float = 0.0
    Delta_a: float | None = None
    Delta_a_eff: float | None = None
    omega_d: float | None = None
    P_pu: float | None = None

    def __post_init__(self):
        _require_nonnegative("epsilon_pu", self.epsilon_pu)
        _require_nonnegative("epsilon_pr", self.epsilon_pr)
        _require_nonnegative("epsilon_d", self.epsilon_d)
        for name in ("delta", "phi_p", "phi_d"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidParameterError(f"{name} must be finite, got {value!r}")
        if (self.Delta_a is None) == (self.Delta_a_eff is None):
            raise InvalidParameterError("give exactly one of Delta_a and Delta_a_eff")
        detuning = self.Delta_a if self.Delta_a is not None else self.Delta_a_eff
        if not math.isfinite(detuning):
            raise InvalidParameterError(f"pump detuning must be finite, got {detuning!r}")
        if self.omega_d is not None and not math.isfinite(self.omega_d):
            raise InvalidParameterError(f"omega_d must be finite, got {self.omega_d!r}")

    @classmethod
    def from_power(cls, sys: SystemParams, P_pu, **kwargs):
        """Derive ``epsilon_pu`` from the pump power in W.

        The pump frequency is ``omega_a - detuning``; for ``Delta_a_eff`` the
        bare detuning is not known before the steady state is solved, so the
        effective value is used (the difference is ~1e-11 relative at optical
        frequencies).
        """
        detuning = kwargs.get("Delta_a", kwargs.get("Delta_a_eff"))
        if detuning is None:
            raise InvalidParameterError("give exactly one of Delta_a and Delta_a_eff")
        eps = pump_amplitude(P_pu, sys.omega_a - detuning, sys.kappa_a)
        return cls(epsilon_pu=eps, P_pu=P_pu, **kwargs)

    def omega_pu(self, sys: SystemParams):
        detuning = self.Delta_a if self.Delta_a is not None else self.Delta_a_eff
        return sys.omega_a - detuning

    @property
    def phi(self):
        """Drive-minus-probe phase reduced to [0, 2pi)."""
        r = (self.phi_d - self.phi_p) % TWO_PI
        return 0.0 if r >= TWO_PI else r

    @property
    def eta(self):
        if self.epsilon_pr <= 0:
            return None
        return self.epsilon_d / self.epsilon_pr

    @property
    def drive_frequency(self):
        return self.delta if self.omega_d is None else self.omega_d

    @property
    def drive_locked(self):
        """True when the mechanical drive sits at the probe sideband frequency."""
        if self.omega_d is None:
            return True
        return math.isclose(self.omega_d, self.delta, rel_tol=1e-12, abs_tol=0.0)

    @property
    def weak_probe(self):
        return self.epsilon_pr < 0.1 * self.epsilon_pu

    @property
    def weak_mechanical_drive(self):
        return self.epsilon_d < 0.1 * self.epsilon_pu

    def with_eta_phi(self, eta, phi):
        """Set the mechanical drive from an amplitude ratio and a phase difference."""
        _require_nonnegative("eta", eta)
        return dataclasses.replace(self, epsilon_d=eta * self.epsilon_pr, phi_d=self.phi_p + phi)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)
