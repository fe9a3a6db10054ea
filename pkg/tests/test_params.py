import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from omit_lab.errors import InvalidParameterError
from omit_lab.params import HBAR, DriveParams, SystemParams, derive_g_om, pump_amplitude

TWO_PI = 2 * math.pi

# sqrt(P kappa / (hbar omega)) at 1 mW, 194 THz, 215 kHz; 40-digit arithmetic
EPS_PU_194THZ = 102513316640.10712265

positive = st.floats(min_value=1e-3, max_value=1e16, allow_nan=False, allow_infinity=False)


def test_pump_amplitude_zero_power():
    assert pump_amplitude(0.0, 1e15, 1e6) == 0.0


def test_pump_amplitude_reference_point():
    eps = pump_amplitude(1e-3, TWO_PI * 194e12, TWO_PI * 215e3)
    assert eps == pytest.approx(EPS_PU_194THZ, rel=1e-14)
    assert eps == pytest.approx(1.025e11, rel=1e-3)


@given(positive, positive, positive)
def test_pump_amplitude_squares_to_photon_flux(P, omega, kappa):
    eps = pump_amplitude(P, omega, kappa)
    assert eps**2 == pytest.approx(P * kappa / (HBAR * omega), rel=1e-12)


@pytest.mark.parametrize("bad", [-1.0, math.nan, math.inf])
def test_pump_amplitude_rejects_bad_power(bad):
    with pytest.raises(InvalidParameterError):
        pump_amplitude(bad, 1e15, 1e6)


def test_g_om_scaling_laws():
    base = derive_g_om(1e15, 1e-3, 1e-12, 1e7)
    assert derive_g_om(1e15, 1e-3, 2e-12, 1e7) == pytest.approx(base / math.sqrt(2), rel=1e-15)
    assert derive_g_om(1e15, 2e-3, 1e-12, 1e7) == pytest.approx(base / 2, rel=1e-15)


def test_g_om_inverse_formula():
    # pick m, solve L for g/2pi = 2.7 Hz, feed back through the forward formula
    wa, wb, target, m = TWO_PI * 194e12, TWO_PI * 947e3, TWO_PI * 2.7, 1e-13
    L = wa / target * math.sqrt(HBAR / (m * wb))
    assert derive_g_om(wa, L, m, wb) == pytest.approx(target, rel=1e-14)


def test_from_hz_converts_to_angular():
    sys = SystemParams.from_hz(
        omega_a=194e12, omega_b=947e3, omega_c=947e3, kappa_a=215e3, gamma_b=140, gamma_c=140, g_om=2.7, J=320e3
    )
    assert sys.J == TWO_PI * 320e3
    assert sys.omega_m == sys.omega_b
    assert sys.high_Q
    assert not sys.resolved_sideband  # 947 kHz < 10 x 215 kHz


def test_from_hz_with_mass_and_length():
    sys = SystemParams.from_hz(
        omega_a=194e12, omega_b=947e3, omega_c=947e3, kappa_a=21e3, gamma_b=140, gamma_c=140, g_om=None, J=0,
        m=1e-13, L=1e-3,
    )
    assert sys.g_om == pytest.approx(derive_g_om(TWO_PI * 194e12, 1e-3, 1e-13, TWO_PI * 947e3))
    assert sys.resolved_sideband


@pytest.mark.parametrize("field", ["omega_a", "omega_b", "omega_c", "kappa_a", "gamma_b", "gamma_c", "g_om"])
def test_system_rejects_nonpositive(toy_system, field):
    with pytest.raises(InvalidParameterError):
        toy_system.replace(**{field: 0.0})


def test_system_allows_zero_coupling(toy_system):
    assert toy_system.replace(J=0.0).J == 0.0
    with pytest.raises(InvalidParameterError):
        toy_system.replace(J=-1.0)


def test_drive_needs_exactly_one_detuning():
    with pytest.raises(InvalidParameterError):
        DriveParams(epsilon_pu=1.0)
    with pytest.raises(InvalidParameterError):
        DriveParams(epsilon_pu=1.0, Delta_a=1.0, Delta_a_eff=1.0)


@given(st.floats(0, 100), st.floats(0, 100))
def test_phi_reduced_to_one_turn(phi_p, phi_d):
    d = DriveParams(epsilon_pu=1.0, phi_p=phi_p, phi_d=phi_d, Delta_a=0.0)
    assert 0 <= d.phi < TWO_PI
    assert math.isclose(math.cos(d.phi), math.cos(phi_d - phi_p), abs_tol=1e-9)


@given(st.floats(0, 10), st.floats(0, 2 * math.pi - 1e-9), st.floats(1e-3, 1e6))
def test_with_eta_phi_round_trip(eta, phi, eps_pr):
    d = DriveParams(epsilon_pu=1e9, epsilon_pr=eps_pr, phi_p=0.3, Delta_a=0.0).with_eta_phi(eta, phi)
    assert d.eta == pytest.approx(eta, rel=1e-12, abs=1e-300)
    assert d.phi == pytest.approx(phi, abs=1e-12)


def test_eta_undefined_without_probe():
    assert DriveParams(epsilon_pu=1.0, Delta_a=0.0).eta is None


def test_weak_drive_flags():
    d = DriveParams(epsilon_pu=100.0, epsilon_pr=10.0, epsilon_d=9.0, Delta_a=0.0)
    assert not d.weak_probe
    assert d.weak_mechanical_drive


def test_drive_locked_by_default():
    d = DriveParams(epsilon_pu=1.0, delta=5.0, Delta_a=0.0)
    assert d.drive_locked and d.drive_frequency == 5.0
    assert not d.replace(omega_d=6.0).drive_locked
