"""Trigonometric polynomials on the torus and the discrete restriction pair.

L^p norms are computed by uniform sampling (the periodic rectangle rule)
with the polynomial evaluated through a zero-padded inverse FFT; the grid
starts at the smallest power of two >= 8 (D+1) and doubles until the
value stabilizes.  For even p the rule is exact as soon as the grid
exceeds p*D points, since |P|^p is itself a trigonometric polynomial of
degree p*D; the even-p route through iterated coefficient convolution is
kept as an independent oracle.

The measures mu_N (atoms on a sparse set, masses 1/(N psi(n))) and nu_N
(uniform on [1, N]) drive the extension operator f -> F(f mu) and its
T T* composition, which multiplies Fourier coefficients by the measure's
masses.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .compensated import frac_product
from .errors import CapacityError, ConvergenceError
from .sparseset import SparseSet
from .sweeps import derive_seed

DEGREE_CAP = 1 << 23
GRID_CAP_DEFAULT = 1 << 26
GRID_CAP_ENV = "MAJORANTLAB_GRID_CAP"
_CONV_BUDGET = 1 << 26


def grid_cap(explicit: int | None = None) -> int:
    if explicit is not None:
        return int(explicit)
    return int(os.environ.get(GRID_CAP_ENV, GRID_CAP_DEFAULT))


@dataclass
class TrigPoly:
    """P(xi) = sum over support of coeff * e(2 pi i n xi), n >= 0."""

    support: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.support = np.asarray(self.support, dtype=np.int64)
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.support.shape != self.coeffs.shape or self.support.ndim != 1:
            raise ValueError("support and coeffs must be matching 1-d arrays")
        if len(self.support):
            if np.any(np.diff(self.support) <= 0):
                raise ValueError("support must be strictly increasing")
            if self.support[0] < 0:
                raise ValueError("support must be nonnegative")
            if self.support[-1] > DEGREE_CAP:
                raise CapacityError(f"degree {self.support[-1]} above cap {DEGREE_CAP}")
        if not np.all(np.isfinite(self.coeffs.view(np.float64))):
            raise ValueError("coefficients must be finite")

    @classmethod
    def from_set(cls, members, coeffs=None) -> "TrigPoly":
        members = np.asarray(members, dtype=np.int64)
        if coeffs is None:
            coeffs = np.ones(len(members), dtype=np.complex128)
        return cls(members, coeffs)

    @property
    def degree(self) -> int:
        return int(self.support[-1]) if len(self.support) else 0

    def dense(self, length: int) -> np.ndarray:
        out = np.zeros(length, dtype=np.complex128)
        out[self.support] = self.coeffs
        return out

    def grid_values(self, K: int) -> np.ndarray:
        """P sampled at xi = j/K, j = 0..K-1."""
        if K <= self.degree:
            raise ValueError("grid shorter than the degree aliases the support")
        return np.fft.ifft(self.dense(K)) * K

    def evaluate(self, xi) -> np.ndarray:
        """Direct evaluation at arbitrary frequencies (compensated phases)."""
        xi = np.atleast_1d(np.asarray(xi, dtype=np.float64))
        out = np.zeros(len(xi), dtype=np.complex128)
        step = max(1, (1 << 22) // max(len(xi), 1))
        for a in range(0, len(self.support), step):
            n = self.support[a:a + step].astype(np.float64)
            ph = frac_product(xi[:, None], n[None, :])
            out += np.exp(2j * np.pi * ph) @ self.coeffs[a:a + step]
        return out

    def shifted(self, k: int) -> "TrigPoly":
        return TrigPoly(self.support + int(k), self.coeffs.copy())

    def l2_coeff_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))


@dataclass
class QuadratureResult:
    value: float
    grid_size: int
    refinement_error: float


def _start_grid(degree: int) -> int:
    K = 8
    while K < 8 * (degree + 1):
        K *= 2
    return K


def lp_norm(P: TrigPoly, p: float, tol: float = 1e-8,
            cap: int | None = None) -> QuadratureResult:
    """(integral of |P|^p over the torus)^(1/p) by doubling rectangle rule."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if not 1e-12 <= tol <= 1e-2:
        raise ValueError("tol must lie in [1e-12, 1e-2]")
    cap = grid_cap(cap)
    if len(P.support) == 0:
        return QuadratureResult(0.0, 0, 0.0)
    K = _start_grid(P.degree)
    even = p == int(p) and int(p) % 2 == 0
    prev = None
    while True:
        vals = P.grid_values(K)
        value = float(np.mean(np.abs(vals) ** p) ** (1.0 / p))
        if even and K > p * P.degree:
            return QuadratureResult(value, K, 0.0)
        if prev is not None:
            rel = abs(value - prev) / max(value, 1e-300)
            if rel < tol:
                return QuadratureResult(value, K, rel)
        if 2 * K > cap:
            raise ConvergenceError(
                f"quadrature did not stabilize within grid cap {cap}",
                last=value, previous=prev)
        prev = value
        K *= 2


def even_p_oracle(P: TrigPoly, p: int, budget: int = _CONV_BUDGET) -> float:
    """||P||_p^p for even p via iterated coefficient convolution.

    Exact up to roundoff and entirely independent of quadrature: the
    coefficients of P^(p/2) are accumulated support-point by support
    point, and Parseval turns their l2 mass into the integral.
    """
    if p not in (2, 4, 6, 8):
        raise ValueError("even_p_oracle supports p in {2, 4, 6, 8}")
    keys = P.support.copy()
    vals = P.coeffs.copy()
    for _ in range(p // 2 - 1):
        if len(keys) * len(P.support) > budget:
            raise CapacityError("convolution exceeds the configured budget")
        grid = (keys[:, None] + P.support[None, :]).ravel()
        prod = (vals[:, None] * P.coeffs[None, :]).ravel()
        keys, inv = np.unique(grid, return_inverse=True)
        vals = np.zeros(len(keys), dtype=np.complex128)
        np.add.at(vals, inv, prod)
    return float(np.sum(np.abs(vals) ** 2))


def lower_bound_lowfreq(A, p: float, N: int | None = None,
                        panels: int = 8, nodes: int = 64) -> float:
    """Certified lower bound for || sum_{n in A} e(n .) ||_p from the
    frequency window |xi| <= 1/(100 N).

    Composite Gauss-Legendre quadrature; the integrand is analytic and
    nonvanishing there (every phase turns by less than 1/100 of a cycle),
    so a fixed rule already has negligible error; one refinement is done
    to confirm.
    """
    A = np.asarray(A, dtype=np.int64)
    if len(A) == 0:
        raise ValueError("A must be nonempty")
    if N is None:
        N = max(int(A[-1]), 1)
    if int(A[-1]) > N:
        raise ValueError("max(A) must not exceed N")
    half = 1.0 / (100.0 * N)

    def integral(num_panels):
        x, w = np.polynomial.legendre.leggauss(nodes)
        edges = np.linspace(-half, half, num_panels + 1)
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            xi = 0.5 * (b - a) * x + 0.5 * (a + b)
            ph = np.exp(2j * np.pi * xi[:, None] * A[None, :].astype(np.float64))
            vals = np.abs(ph.sum(axis=1)) ** p
            total += 0.5 * (b - a) * float(w @ vals)
        return total

    v1 = integral(panels)
    v2 = integral(2 * panels)
    if abs(v2 - v1) > 1e-8 * max(abs(v2), 1e-300):
        v1, v2 = v2, integral(4 * panels)
    return float(v2 ** (1.0 / p))


# ---------------------------------------------------------------- measures


@dataclass
class DiscreteMeasure:
    """Finitely supported measure on the integers with positive masses."""

    atoms: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.atoms = np.asarray(self.atoms, dtype=np.int64)
        self.masses = np.asarray(self.masses, dtype=np.float64)
        if self.atoms.shape != self.masses.shape:
            raise ValueError("atoms and masses must match")
        if len(self.atoms) and np.any(np.diff(self.atoms) <= 0):
            raise ValueError("atoms must be strictly increasing")
        if not np.all(np.isfinite(self.masses)) or np.any(self.masses <= 0):
            raise ValueError("masses must be finite and positive")

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.masses))


def measure_mu(bset: SparseSet) -> DiscreteMeasure:
    """Atoms on the set, masses psi(n)^{-1} / N."""
    if bset.psi is None:
        raise ValueError("set was built without a window")
    n = bset.members.astype(np.float64)
    masses = 1.0 / (np.asarray(bset.psi(n), dtype=np.float64) * bset.spec.N)
    return DiscreteMeasure(bset.members, masses)


def measure_nu(N: int) -> DiscreteMeasure:
    """Uniform measure on [1, N] with masses 1/N."""
    return DiscreteMeasure(np.arange(1, N + 1, dtype=np.int64),
                           np.full(N, 1.0 / N))


def fourier_of_measure(m: DiscreteMeasure, xi: float) -> complex:
    """sum of mass * e(xi * atom), compensated phases."""
    total = 0.0 + 0.0j
    step = 1 << 20
    for a in range(0, len(m.atoms), step):
        n = m.atoms[a:a + step].astype(np.float64)
        total += np.sum(m.masses[a:a + step]
                        * np.exp(2j * np.pi * frac_product(xi, n)))
    return complex(total)


def fourier_sup_of_difference(m1: DiscreteMeasure, m2: DiscreteMeasure,
                              oversample: int = 8) -> tuple[float, int]:
    """max over a uniform grid of |F(m1 - m2)(xi)| and the grid size used."""
    top = int(max(m1.atoms[-1] if len(m1.atoms) else 0,
                  m2.atoms[-1] if len(m2.atoms) else 0))
    coeff = np.zeros(top + 1, dtype=np.complex128)
    np.add.at(coeff, m1.atoms, m1.masses)
    np.add.at(coeff, m2.atoms, -m2.masses)
    K = 1 << max(3, math.ceil(math.log2(oversample * (top + 1))))
    dense = np.zeros(K, dtype=np.complex128)
    dense[: top + 1] = coeff
    vals = np.fft.ifft(dense) * K
    return float(np.max(np.abs(vals))), K


# --------------------------------------------------- restriction operators


def extension_poly(f_vals, m: DiscreteMeasure) -> TrigPoly:
    """The trigonometric polynomial F(f m): coefficients f(n) m(n) on the
    atoms; its values are the extension operator applied to f."""
    f_vals = np.asarray(f_vals, dtype=np.complex128)
    if f_vals.shape != m.atoms.shape:
        raise ValueError("f must be given on the atoms of the measure")
    return TrigPoly(m.atoms.copy(), f_vals * m.masses)


def apply_extension(f_vals, m: DiscreteMeasure, xi_grid) -> np.ndarray:
    """Sample F(f m) at explicit frequencies."""
    return extension_poly(f_vals, m).evaluate(xi_grid)


def ttstar_apply(f: TrigPoly, m: DiscreteMeasure) -> TrigPoly:
    """T T* f: multiply each Fourier coefficient of f by the mass at its
    frequency (convolution with F(m) on the frequency side)."""
    if len(m.atoms) == 0:
        return TrigPoly(np.empty(0, dtype=np.int64),
                        np.empty(0, dtype=np.complex128))
    idx = np.searchsorted(m.atoms, f.support)
    idx_c = np.clip(idx, 0, len(m.atoms) - 1)
    hit = (idx < len(m.atoms)) & (m.atoms[idx_c] == f.support)
    masses = np.where(hit, m.masses[idx_c], 0.0)
    keep = masses != 0.0
    return TrigPoly(f.support[keep], f.coeffs[keep] * masses[keep])


def l2_norm_weighted(f_vals, m: DiscreteMeasure) -> float:
    """||f|| in L2 of the measure."""
    f_vals = np.asarray(f_vals, dtype=np.complex128)
    return float(np.sqrt(np.sum(np.abs(f_vals) ** 2 * m.masses)))


def restriction_ratios(bset: SparseSet, p: float, trials: int = 16,
                       seed: int = 0, tol: float = 1e-8) -> list[float]:
    """||F(f mu_N)||_p * N^(1/p) / ||f||_{L2(mu_N)} for seeded test
    functions on the set: the all-ones choice first, then standard
    complex normal coefficients."""
    mu = measure_mu(bset)
    N = bset.spec.N
    out = []
    for t in range(trials):
        if t == 0:
            f = np.ones(len(mu.atoms), dtype=np.complex128)
        else:
            rng = np.random.default_rng(derive_seed(derive_seed(seed, N), t))
            f = (rng.standard_normal(len(mu.atoms))
                 + 1j * rng.standard_normal(len(mu.atoms))) / math.sqrt(2.0)
        num = lp_norm(extension_poly(f, mu), p, tol=tol).value * N ** (1.0 / p)
        den = l2_norm_weighted(f, mu)
        out.append(num / den)
    return out
