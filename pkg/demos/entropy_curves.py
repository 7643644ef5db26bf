"""Environment entropy after the pulse has passed.

Sweeps the long-time transfer probability and prints the total
environment entropy S_E alongside its classical part S_E^c (the part
inherited from the emitter's initial mixture rather than generated by
entanglement).  S_E^c grows monotonically with the transfer and reaches
ln 2 at full adaptation, while S_E peaks at partial transfer where the
scattered and unscattered photons are hardest to tell apart.
"""

import math

import numpy as np

from lambda_adapt.entropy import entropy_curve, heat_to_pab
from lambda_adapt.model import InitialMixture, LambdaSystem


def main():
    s = LambdaSystem(omega_a=1.0, gamma_a=1.0, gamma_b=1.0)
    mix = InitialMixture(0.5, 0.5)
    curve = entropy_curve(s, mix, n_points=200)

    print("-- S_E and S_E^c vs p_ab(inf), p_a0 = 1/2 --")
    print(f"{'p_ab':>6s} {'S_E':>8s} {'S_E^c':>8s}")
    for k in range(0, 200, 20):
        print(f"{curve.p_ab[k]:6.3f} {curve.s_e[k]:8.5f} "
              f"{curve.s_e_c[k]:8.5f}")
    print(f"{curve.p_ab[-1]:6.3f} {curve.s_e[-1]:8.5f} "
          f"{curve.s_e_c[-1]:8.5f}")

    k = int(np.argmax(curve.s_e))
    print(f"\nS_E^c rises monotonically: "
          f"{bool(np.all(np.diff(curve.s_e_c) >= -1e-12))}")
    print(f"S_E^c(1) = {curve.s_e_c[-1]:.9f}  (ln 2 = {math.log(2):.9f})")
    print(f"S_E peaks at p_ab = {curve.p_ab[k]:.3f} with "
          f"S_E = {curve.s_e[k]:.5f}")
    print("full adaptation erases the quantum contribution: the photon is")
    print("then a perfect record of which ground state the emitter left.")

    print("\n-- heat as a proxy for adaptation --")
    for p in (0.2, 0.6, 0.95):
        q = p * (s.omega_a * s.gamma_total / s.gamma_b - s.delta_ab)
        print(f"Q = {q:5.2f} hbar  ->  p_ab = {heat_to_pab(s, q):.3f}")
    print("dissipated heat and transfer probability carry the same")
    print("information for this driving protocol.")


if __name__ == "__main__":
    main()
