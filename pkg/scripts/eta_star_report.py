"""Critical drive ratio of the reference device, and how it compares with 0.5.

Prints eta* from the closed form and from bisection, then Re[eps_T] at zero
detuning for a few drive ratios so the sign change is visible.
"""
import math

import numpy as np

from omit_lab.response import critical_eta, critical_eta_bisect, quadrature
from omit_lab.sweep import figure_preset
from omit_lab.steady import solve_steady_state


def main():
    sc = figure_preset("fig5")
    sys, drive = sc.system, sc.drive
    ss = solve_steady_state(sys, drive)
    eta_star = critical_eta(sys, ss)
    print(f"|G_om|/2pi      = {abs(ss.G_om) / (2 * math.pi):.6f} Hz")
    print(f"eta* closed     = {eta_star:.12f}")
    print(f"eta* bisection  = {critical_eta_bisect(sys, ss):.12f}")
    print(f"eta* / 0.5      = {eta_star / 0.5:.4f}")
    print()
    print("   eta      Re[eps_T](delta = omega_m, phi = 0)")
    at_res = drive.replace(delta=sys.omega_m)
    for eta in np.concatenate([np.linspace(0, 2, 5), [0.9 * eta_star, eta_star, 1.1 * eta_star]]):
        value = quadrature(sys, ss, at_res.with_eta_phi(eta, 0.0)).real
        print(f"{eta:8.4f}   {value:+.6e}")


if __name__ == "__main__":
    main()
