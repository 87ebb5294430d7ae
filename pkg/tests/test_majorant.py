import math

import numpy as np
import pytest

from majorantlab import AdmissibilityError, CapacityError, RegVaryFn, SlowlyVaryingSpec
from majorantlab.majorant import (
    MajorantProblem,
    brute_force_constant,
    estimate_constant,
    hy_envelope,
    p_threshold,
    uniformity_sweep,
)
from majorantlab.majorant import _GridObjective
from majorantlab.sparseset import SetSpec, build_frac_set


def rng():
    return np.random.default_rng(905)


def random_set(r, size, top):
    return np.sort(r.choice(np.arange(0, top + 1), size=size, replace=False))


# ---------------------------------------------------------------- threshold


@pytest.mark.parametrize("c1", [1.0, 1.25, 1.5, 1.9])
def test_threshold_is_two_at_c2_one(c1):
    assert p_threshold(c1, 1.0) == 2.0


def test_threshold_endpoint_six():
    assert p_threshold(1.0, 6 / 5 - 1e-9) == pytest.approx(6.0, abs=1e-6)
    assert p_threshold(1.0, 6 / 5) == pytest.approx(6.0, abs=1e-12)


def test_threshold_monotone_in_c2():
    grid = np.linspace(1.0, 6 / 5 - 1e-9, 20)
    for c1 in (1.0, 1.3, 1.8):
        vals = [p_threshold(c1, c2) for c2 in grid]
        assert all(b > a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert all(v >= 2.0 for v in vals)


def test_threshold_rejects_inadmissible():
    with pytest.raises(AdmissibilityError):
        p_threshold(3.0, 2.0)
    with pytest.raises(AdmissibilityError):
        p_threshold(1.0, -1.0)


def test_threshold_two_closed_forms_agree_symbolically():
    import sympy

    c1, c2 = sympy.symbols("c1 c2", positive=True)
    den = 1 / c1 + 3 / c2 - 3
    first = 2 + (12 - 12 / c2) / den
    second = (2 / c1 - 6 / c2 + 6) / den
    assert sympy.simplify(first - second) == 0


# ----------------------------------------------------------- estimates


def test_p2_gives_one():
    est = estimate_constant(MajorantProblem(np.array([0, 1, 3]), 3, 2.0, seed=1))
    assert est.value == pytest.approx(1.0, abs=1e-9)
    assert np.all(np.abs(np.abs(est.argmax_coeffs) - 1) < 1e-12)


def test_even_p_never_exceeds_one():
    r = rng()
    for _ in range(6):
        A = random_set(r, 10, 60)
        for p in (4.0, 6.0):
            est = estimate_constant(MajorantProblem(A, 60, p, seed=3))
            assert est.value <= 1 + 1e-6
            assert est.value >= 1 - 1e-9


def test_c3_exceeds_one_and_matches_brute_force():
    prob = MajorantProblem(np.array([0, 1, 3]), 3, 3.0, seed=2)
    est = estimate_constant(prob, method="signs")
    bf = brute_force_constant([0, 1, 3], 3.0, "signs")
    assert bf.value > 1.0005
    assert est.value == pytest.approx(bf.value, abs=1e-6)


def test_budget_exhaustion_flagged_not_fatal():
    A = np.sort(rng().choice(500, size=80, replace=False))
    est = estimate_constant(MajorantProblem(A, 500, 3.0, budget=1, seed=0))
    assert est.budget_exhausted
    assert est.value >= 1 - 1e-9


def test_estimate_validates_inputs():
    with pytest.raises(ValueError):
        MajorantProblem(np.array([], dtype=np.int64), 5, 3.0)
    with pytest.raises(ValueError):
        MajorantProblem(np.array([10]), 5, 3.0)
    with pytest.raises(ValueError):
        MajorantProblem(np.array([1]), 5, 1.5)


# ----------------------------------------------------------- brute force


@pytest.mark.parametrize("alphabet", ["signs", "fourth_roots"])
def test_brute_force_p2_is_one(alphabet):
    bf = brute_force_constant([0, 2, 5], 2.0, alphabet)
    assert bf.value == pytest.approx(1.0, abs=1e-10)


def test_brute_force_phase_grid():
    bf = brute_force_constant([0, 1, 3], 3.0, "phase_grid", k=4)
    ref = brute_force_constant([0, 1, 3], 3.0, "fourth_roots")
    assert bf.value == pytest.approx(ref.value, abs=1e-12)


def test_brute_force_two_element_sign_symmetry():
    bf = brute_force_constant([1, 2], 4.0, "signs")
    assert bf.value == pytest.approx(1.0, abs=1e-10)


def test_global_phase_quotient_lossless():
    r = rng()
    for alphabet in ("signs", "fourth_roots"):
        A = random_set(r, 5, 24)
        fixed = brute_force_constant(A, 3.0, alphabet, fix_global_phase=True)
        free = brute_force_constant(A, 3.0, alphabet, fix_global_phase=False)
        assert fixed.value == pytest.approx(free.value, abs=1e-9)
        assert free.trials == fixed.trials * (2 if alphabet == "signs" else 4)


def test_brute_force_capacity_error():
    with pytest.raises(CapacityError):
        brute_force_constant(np.arange(12), 3.0, "phase_grid", k=64)


# ----------------------------------------------------------- dominance


def test_estimate_dominates_sign_brute_force():
    r = rng()
    for _ in range(3):
        A = random_set(r, 9, 40)
        est = estimate_constant(MajorantProblem(A, 40, 3.0, seed=4))
        bf = brute_force_constant(A, 3.0, "signs")
        assert est.value >= bf.value - 1e-9


def test_phase_ascent_dominates_fourth_roots():
    r = rng()
    for trial in range(3):
        A = random_set(r, 8, 40)
        est = estimate_constant(MajorantProblem(A, 40, 3.0, seed=5 + trial),
                                method="phase")
        bf = brute_force_constant(A, 3.0, "fourth_roots")
        assert est.value >= bf.value - 1e-6


# ------------------------------------------------------------- gradient


@pytest.mark.parametrize("p", [2.5, 3.0, 5.0])
def test_gradient_matches_finite_differences(p):
    r = rng()
    A = random_set(r, 20, 96)
    obj = _GridObjective(A, p)
    theta = r.uniform(0, 2 * math.pi, size=len(A))
    _, g = obj.value_and_grad(theta)
    step = 1e-5
    for i in range(0, len(A), 5):
        e = np.zeros_like(theta)
        e[i] = step
        fd = (obj.value(np.exp(1j * (theta + e)))
              - obj.value(np.exp(1j * (theta - e)))) / (2 * step)
        assert g[i] == pytest.approx(fd, rel=1e-4, abs=1e-12)


# -------------------------------------------------------------- envelope


def test_estimates_stay_below_envelope():
    r = rng()
    for _ in range(30):
        size = int(r.integers(3, 9))
        A = random_set(r, size, 40)
        N = int(max(A[-1], 1))
        est = estimate_constant(MajorantProblem(A, N, 3.0, seed=6))
        assert est.value <= hy_envelope(A, N, 3.0)


def test_envelope_full_interval_feasible():
    N = 128
    env = hy_envelope(np.arange(1, N + 1), N, 3.0)
    assert math.isfinite(env)
    assert env >= 1.0


def test_envelope_scaling_on_doubling_N():
    A = np.arange(1, 65)
    p = 3.0
    ratio = hy_envelope(A, 256, p) / hy_envelope(A, 128, p)
    assert ratio == pytest.approx(2 ** (1 / p), rel=1e-3)


# ---------------------------------------------------------------- sweep


def test_uniformity_sweep_small():
    h = RegVaryFn(1.0, SlowlyVaryingSpec("log_power", B=1.0))

    def build(N):
        return build_frac_set(SetSpec("frac_plus", h, h, N))

    rows = uniformity_sweep(build, 2.5, [2**8, 2**9, 2**10],
                            budget=400, seed=42)
    assert len(rows) == 3
    running = [r.params["running_max"] for r in rows]
    assert running == sorted(running)
    for r in rows:
        assert r.value >= 1 - 1e-9
        assert r.value <= r.reference  # below the a priori envelope
        assert math.isfinite(r.exponent)
    again = uniformity_sweep(build, 2.5, [2**8, 2**9, 2**10],
                             budget=400, seed=42)
    assert [r.value for r in rows] == [r.value for r in again]
