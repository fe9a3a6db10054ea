import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from omit_lab.checks import random_case
from omit_lab.errors import DegenerateModeError, InvalidParameterError, UndefinedCriticalPointError
from omit_lab.params import DriveParams, SystemParams
from omit_lab.response import (
    critical_eta,
    critical_eta_bisect,
    dressed_modes,
    quadrature,
    response,
    response_no_drive,
    response_single_omit,
    sideband_closed_form,
    sideband_linear_solve,
)
from omit_lab.steady import solve_steady_state
from omit_lab.sweep import AxisSpec, find_minima, sweep_detuning

# (J^2 + gamma_b gamma_c / 4) / (|G| J) at the reference device, 40-digit arithmetic
ETA_STAR = 6.9233465917102865134


def zero_coupling(ss):
    return ss.__class__(**{**ss.__dict__, "G_om": 0j})


def at(drive, sys, x):
    return drive.replace(delta=sys.omega_m * (1 + x))


def test_no_sources_gives_zero(reference):
    sys, drive, ss = reference
    d = drive.replace(epsilon_pr=0.0, epsilon_d=0.0, delta=sys.omega_m)
    assert sideband_closed_form(sys, ss, d) == 0
    assert sideband_linear_solve(sys, ss, d) == (0, 0, 0)


def test_bare_cavity_lorentzian(reference):
    sys, drive, ss = reference
    ss0 = zero_coupling(ss)
    d = drive.replace(delta=sys.omega_m * 1.1, phi_p=0.7)
    lam_a = d.delta - ss.Delta_a_prime
    expected = cmath.exp(-0.7j) * d.epsilon_pr / (sys.kappa_a / 2 - 1j * lam_a)
    assert sideband_closed_form(sys, ss0, d) == pytest.approx(expected, rel=1e-14)


def test_bare_cavity_on_resonance(reference):
    sys, drive, ss = reference
    r = response(sys, zero_coupling(ss), drive.replace(delta=ss.Delta_a_prime))
    assert r.eps_T == pytest.approx(2.0, rel=1e-15)
    assert r.T_pr == pytest.approx(1.0, rel=1e-15)


def test_far_detuned_limit(reference):
    sys, drive, ss = reference
    r = response(sys, ss, drive.replace(delta=1e6 * sys.omega_m))
    assert abs(r.eps_T) < 1e-5
    assert abs(r.T_pr + 1) < 1e-5


def test_reference_point_closed_form_vs_solve(reference):
    sys, drive, ss = reference
    d = drive.with_eta_phi(1.0, 0.0).replace(delta=sys.omega_m)
    cf = sideband_closed_form(sys, ss, d)
    assert abs(cf - sideband_linear_solve(sys, ss, d)[0]) <= 1e-10 * abs(cf)


@given(st.integers(0, 2**32 - 1))
def test_closed_form_matches_linear_solve(seed):
    sys, ss, drive = random_case(np.random.default_rng(seed))
    cf = sideband_closed_form(sys, ss, drive)
    ls = sideband_linear_solve(sys, ss, drive)[0]
    assert abs(cf - ls) <= 1e-10 * abs(ls)


def test_decoupled_solve(reference):
    sys, drive, _ = reference
    sys0 = sys.replace(J=0.0)
    ss0 = solve_steady_state(sys0, drive)
    d = drive.replace(delta=sys.omega_m * 1.05)
    da, db, dc = sideband_linear_solve(sys0, ss0, d)
    assert dc == 0
    lam = d.delta - sys.omega_m
    two_mode = d.epsilon_pr / (
        sys.kappa_a / 2 - 1j * lam + abs(ss0.G_om) ** 2 / (sys.gamma_b / 2 - 1j * lam)
    )
    assert da == pytest.approx(two_mode, rel=1e-12)


def test_response_fields(reference):
    sys, drive, ss = reference
    d = drive.with_eta_phi(0.5, 1.0).replace(delta=sys.omega_m * 1.2)
    r = response(sys, ss, d)
    assert r.T_pr == r.eps_T - 1
    assert (r.absorption, r.dispersion) == (r.eps_T.real, r.eps_T.imag)
    expected_out = sys.kappa_a * sideband_closed_form(sys, ss, d) - d.epsilon_pr
    assert r.eps_out == pytest.approx(expected_out, rel=1e-14)


def test_quadrature_needs_probe(reference):
    sys, drive, ss = reference
    with pytest.raises(InvalidParameterError):
        quadrature(sys, ss, drive.replace(epsilon_pr=0.0))


def test_unlocked_drive_does_not_reach_probe_sideband(reference):
    sys, drive, ss = reference
    d = drive.with_eta_phi(1.0, 0.0).replace(delta=sys.omega_m)
    off = d.replace(omega_d=1.3 * sys.omega_m)
    assert quadrature(sys, ss, off) == quadrature(sys, ss, d.with_eta_phi(0.0, 0.0))


def test_dressed_modes_reference(reference):
    sys, _, ss = reference
    m = dressed_modes(sys, ss)
    assert m.lambda_plus / (2 * math.pi) == pytest.approx(70 + 320e3j, rel=1e-13)
    assert m.lambda_minus / (2 * math.pi) == pytest.approx(70 - 320e3j, rel=1e-13)
    assert m.regime == "underdamped"


def mechanical_eigenvalues(sys):
    """Eigenvalue oracle: roots of the 2x2 mechanical generator."""
    M = np.array([[sys.gamma_b / 2, -1j * sys.J], [-1j * sys.J, sys.gamma_c / 2]])
    return sorted(np.linalg.eigvals(M), key=lambda z: (z.imag, z.real))


@given(st.floats(1.0, 1e4), st.floats(1.0, 1e4), st.floats(0.0, 1e6))
def test_dressed_modes_are_mechanical_eigenvalues(gb, gc, J):
    sys = SystemParams(omega_a=1e15, omega_b=1e7, omega_c=1e7, kappa_a=1e6, gamma_b=gb, gamma_c=gc, g_om=1.0, J=J)
    ss = solve_steady_state(sys, DriveParams(epsilon_pu=1e9, Delta_a_eff=1e7))
    radicand = 4 * J**2 - (gb / 2 - gc / 2) ** 2
    if abs(radicand) <= 1e-6 * (gb + gc) ** 2:
        return  # exceptional point, covered separately
    m = dressed_modes(sys, ss)
    ours = sorted([m.lambda_plus, m.lambda_minus], key=lambda z: (z.imag, z.real))
    for a, b in zip(ours, mechanical_eigenvalues(sys)):
        assert a == pytest.approx(b, rel=1e-9, abs=1e-9 * (gb + gc + J))
    G2 = abs(ss.G_om) ** 2
    assert m.lambda_plus + m.lambda_minus == pytest.approx((gb + gc) / 2, rel=1e-12)
    assert m.A_plus + m.A_minus == pytest.approx(G2, rel=1e-12)


def test_symmetric_damping(toy_system):
    sys = toy_system.replace(gamma_c=toy_system.gamma_b)
    ss = solve_steady_state(sys, DriveParams(epsilon_pu=1e9, Delta_a_eff=sys.omega_b))
    m = dressed_modes(sys, ss)
    assert m.lambda_plus == pytest.approx(sys.gamma_b / 2 + 1j * sys.J, rel=1e-15)


def test_decoupled_unequal_damping_is_overdamped(toy_system):
    sys = toy_system.replace(J=0.0)
    ss = solve_steady_state(sys, DriveParams(epsilon_pu=1e9, Delta_a_eff=sys.omega_b))
    m = dressed_modes(sys, ss)
    assert m.regime == "overdamped"
    assert m.lambda_plus.imag == 0 and m.lambda_minus.imag == 0
    assert sorted([m.lambda_plus.real, m.lambda_minus.real]) == pytest.approx(
        sorted(e.real for e in mechanical_eigenvalues(sys))
    )


def test_degenerate_modes(toy_system):
    sys = toy_system.replace(J=0.0, gamma_c=toy_system.gamma_b)
    ss = solve_steady_state(sys, DriveParams(epsilon_pu=1e9, Delta_a_eff=sys.omega_b))
    with pytest.raises(DegenerateModeError):
        dressed_modes(sys, ss)
    m = dressed_modes(sys, ss, allow_degenerate=True)
    assert m.A_plus == m.A_minus == pytest.approx(abs(ss.G_om) ** 2 / 2)
    # exceptional point J = |gamma_b - gamma_c| / 4 never has a partial-fraction form
    ep = toy_system.replace(J=abs(toy_system.gamma_b - toy_system.gamma_c) / 4)
    with pytest.raises(DegenerateModeError):
        dressed_modes(ep, ss, allow_degenerate=True)


def test_dressed_form_matches_full_quadrature(reference):
    sys, drive, ss = reference
    worst = 0.0
    for x in np.linspace(-0.7, 0.7, 2001):
        d = at(drive, sys, x)
        full = quadrature(sys, ss, d)
        worst = max(worst, abs(response_no_drive(sys, ss, d.delta - sys.omega_m) - full) / abs(full))
    assert worst <= 1e-10


def test_dressed_form_far_limit(reference):
    sys, _, ss = reference
    assert abs(response_no_drive(sys, ss, 1e12)) < 1e-5
    assert abs(response_no_drive(sys, ss, -1e12)) < 1e-5


def test_minimum_near_dressed_mode_frequency(reference):
    # dips sit within 0.1% of lambda = J; the cavity pulls them slightly inward
    sys, drive, ss = reference
    table = sweep_detuning(sys, drive, AxisSpec(0.2, 0.5, 3001), ss=ss)
    (pos, _), = find_minima(table.axis, table.absorption)
    assert pos == pytest.approx(sys.J / sys.omega_m, rel=1e-3)


def test_single_omit_on_resonance(reference):
    sys, drive, _ = reference
    sys0 = sys.replace(J=0.0)
    ss0 = solve_steady_state(sys0, drive)
    value = response_single_omit(sys0, ss0, 0.0)
    expected = sys.kappa_a / (sys.kappa_a / 2 + 2 * abs(ss0.G_om) ** 2 / sys.gamma_b)
    assert value == pytest.approx(expected, rel=1e-15)
    assert value.real < 0.01 * 2.0  # bare cavity gives 2


def test_single_omit_dip_centered(reference):
    sys, drive, _ = reference
    sys0 = sys.replace(J=0.0)
    ss0 = solve_steady_state(sys0, drive)
    x = np.linspace(-0.7, 0.7, 2001)
    re = [response_single_omit(sys0, ss0, sys.omega_m * v).real for v in x]
    (pos, _), = find_minima(x, re)
    assert abs(pos) < x[1] - x[0]


def test_critical_eta(reference):
    sys, drive, ss = reference
    eta = critical_eta(sys, ss)
    assert eta == pytest.approx(ETA_STAR, rel=1e-12)
    assert critical_eta_bisect(sys, ss) == pytest.approx(eta, rel=1e-8)
    d = drive.with_eta_phi(eta, 0.0).replace(delta=sys.omega_m)
    assert abs(quadrature(sys, ss, d).real) <= 1e-8


def test_critical_eta_without_damping(reference):
    sys, _, ss = reference
    # damping-free limit through the closed form
    sys0 = sys.replace(gamma_b=1e-300, gamma_c=1e-300)
    assert critical_eta(sys0, ss, verify=False) == pytest.approx(sys.J / abs(ss.G_om), rel=1e-15)


def test_critical_eta_undefined(reference):
    sys, drive, _ = reference
    sys0 = sys.replace(J=0.0)
    with pytest.raises(UndefinedCriticalPointError):
        critical_eta(sys0, solve_steady_state(sys0, drive))


def test_critical_eta_needs_resonant_red_sideband(reference):
    sys, drive, _ = reference
    ss = solve_steady_state(sys, drive.replace(Delta_a_eff=1.1 * sys.omega_b))
    with pytest.raises(InvalidParameterError):
        critical_eta(sys, ss)
    with pytest.raises(InvalidParameterError):
        critical_eta(sys, solve_steady_state(sys, drive, gauge="raw"))
