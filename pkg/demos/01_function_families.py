#!/usr/bin/env python3
"""Tour of the regularly varying function families.

Builds h(x) = x^c ell(x) for each supported slowly varying factor,
inverts it, and shows the quantities the sparse-set construction relies
on: the inverse phi, the window psi, and the curvature factor sigma1.
"""

import numpy as np

from majorantlab import InverseFn, PsiFn, RegVaryFn, SlowlyVaryingSpec

FAMILIES = {
    "x log x": RegVaryFn(1.0, SlowlyVaryingSpec("log_power", B=1.0)),
    "x (log x)^2": RegVaryFn(1.0, SlowlyVaryingSpec("log_power", B=2.0)),
    "x exp(sqrt(log x))": RegVaryFn(1.0, SlowlyVaryingSpec("exp_log_power", B=1.0, C=0.5)),
    "x log log x": RegVaryFn(1.0, SlowlyVaryingSpec("iterated_log", m=2)),
    "x^1.5": RegVaryFn(1.5, SlowlyVaryingSpec("constant_one")),
}


def main():
    for name, h in FAMILIES.items():
        phi = InverseFn(h)
        print(f"== {name}  ({h.to_kv()})")
        print(f"   domain starts at x0 = {h.x0}, h(x0) = {phi.y0:.6g}")

        x = 1e6
        print(f"   h(1e6)  = {h.value(x):.6e}")
        print(f"   h'(1e6) = {h.deriv(x, 1):.6e},  h''(1e6) = {h.deriv(x, 2):.3e}")

        y = h.value(x)
        back = phi.invert(y)
        print(f"   phi(h(1e6)) = {back:.6f}  (round trip error {abs(back - x):.2e})")

        # the window psi = phi(x+1) - phi(x) and where it first fits below 1/2
        psi = PsiFn(phi)
        print(f"   psi window opens at n_min = {psi.n_min}, "
              f"psi(n_min) = {psi.value(float(psi.n_min)):.4f}")

        # curvature factor; constant for pure powers, ~1/log for x log x
        xs = np.array([1e4, 1e6, 1e8])
        sig = [phi.sigma1_hat(v) for v in xs]
        print("   sigma1_hat at 1e4/1e6/1e8:",
              ", ".join(f"{s:.4f}" for s in sig))
        print()


if __name__ == "__main__":
    main()
