import math
import warnings

import pytest
from hypothesis import settings

from omit_lab.config import ConfigWarning
from omit_lab.params import DriveParams, SystemParams
from omit_lab.steady import solve_steady_state
from omit_lab.sweep import figure_preset

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture(autouse=True)
def _quiet_regime_warnings():
    # the reference device sits at omega_b / kappa_a = 4.4, below the 10x flag
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConfigWarning)
        yield


@pytest.fixture
def report():
    """Collect one summary line per acceptance criterion."""

    def record(tag, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] {tag}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def reference():
    """System, drive and real-G steady state of the reference device (eta = 0)."""
    sc = figure_preset("fig2a")
    return sc.system, sc.drive, solve_steady_state(sc.system, sc.drive)


@pytest.fixture
def toy_system():
    return SystemParams(
        omega_a=1e15, omega_b=1e7, omega_c=1.1e7, kappa_a=1e6, gamma_b=1e2, gamma_c=2e2, g_om=10.0, J=2e6
    )


def toy_drive(sys, **kw):
    base = dict(epsilon_pu=1e9, epsilon_pr=1e5, delta=sys.omega_b, Delta_a_eff=sys.omega_b)
    base.update(kw)
    return DriveParams(**base)


TWO_PI = 2 * math.pi
