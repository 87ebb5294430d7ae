#!/usr/bin/env python3
"""L^p norms of trigonometric polynomials: quadrature vs exact oracles."""

import numpy as np

from majorantlab import TrigPoly, even_p_oracle, lower_bound_lowfreq, lp_norm


def main():
    P = TrigPoly([1, 2], [1.0, 1.0])
    got = lp_norm(P, 4.0)
    print(f"||e_1 + e_2||_4 = {got.value:.12f}  (6^(1/4) = {6**0.25:.12f}),")
    print(f"   grid {got.grid_size}, refinement error {got.refinement_error:.1e}")
    print()

    rng = np.random.default_rng(4)
    support = np.sort(rng.choice(256, size=12, replace=False))
    coeffs = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    Q = TrigPoly(support, coeffs)
    print("random 12-term polynomial:")
    print(f"   Parseval check: quadrature {lp_norm(Q, 2.0).value:.12f} "
          f"vs coefficients {Q.l2_coeff_norm():.12f}")
    for p in (4, 6):
        a = lp_norm(Q, float(p)).value
        b = even_p_oracle(Q, p) ** (1.0 / p)
        print(f"   p = {p}: quadrature {a:.10f} vs convolution oracle {b:.10f}")
    print()

    print("norms grow with p (probability measure on the torus):")
    vals = [(p, lp_norm(Q, float(p)).value) for p in (2, 3, 4, 6, 8)]
    print("   " + "  ".join(f"p={p}: {v:.4f}" for p, v in vals))
    print()

    A = np.arange(1, 33)
    print("low-frequency certified floor for the 32-term Dirichlet block:")
    for p in (2.0, 3.0):
        lb = lower_bound_lowfreq(A, p, N=64)
        print(f"   p = {p}: ||sum e(n.)||_p >= {lb:.6f}")


if __name__ == "__main__":
    main()
