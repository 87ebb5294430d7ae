import math

import numpy as np
import pytest

from majorantlab import InverseFn, PsiFn, RegVaryFn, SlowlyVaryingSpec
from majorantlab.sparseset import (
    SetSpec,
    build_floor_set,
    build_frac_set,
    count_vs_phi2,
    load_set,
    member_floor_characterization,
    member_frac,
)


def xlogx():
    return RegVaryFn(1.0, SlowlyVaryingSpec("log_power", B=1.0))


def x15(x0=1.0):
    return RegVaryFn(1.5, SlowlyVaryingSpec("constant_one"), x0=x0)


class ConstPsi:
    """Synthetic window for membership edge cases."""

    def __init__(self, value, n_min=1):
        self.v = value
        self.n_min = n_min

    def __call__(self, x):
        return np.full_like(np.asarray(x, dtype=np.float64), self.v)


# ---------------------------------------------------------- floor sets


def test_floor_set_small_pure_power():
    s = build_floor_set(x15(), 12)
    assert s.members.tolist() == [1, 2, 5, 8, 11]


def test_floor_set_identity_degenerate():
    ident = RegVaryFn(1.0, SlowlyVaryingSpec("constant_one"), x0=1.0, check=False)
    s = build_floor_set(ident, 10)
    assert s.members.tolist() == list(range(1, 11))


def test_floor_set_cardinality_matches_inverse():
    h = xlogx()
    s = build_floor_set(h, 10**6)
    phi = InverseFn(h)
    # one member per index n in [ceil(x0), phi(N+1)) since gaps exceed 1
    expected = math.floor(phi.invert(10**6 + 1.0)) - math.ceil(h.x0) + 1
    if h.value(float(math.floor(phi.invert(10**6 + 1.0)))) >= 10**6 + 1:
        expected -= 1
    assert len(s.members) == expected
    assert np.all(np.diff(s.members) > 0)


def test_floor_set_exact_tie_is_borderline():
    # h(1) = 1 and h(4) = 8 exactly, so both land on the floor boundary
    s = build_floor_set(x15(), 12)
    assert s.borderline_count == 2


# ---------------------------------------------------------- membership


def test_integer_phi_is_member_of_both_signs():
    phi = InverseFn(x15())
    psi = PsiFn(phi)
    for sign in ("plus", "minus"):
        member, margin = member_frac(8, phi, psi, sign)
        assert member
        assert margin == pytest.approx(psi.value(8.0), abs=1e-15)


def test_member_frac_pinned_margin_at_n_min():
    # frozen from the compensated evaluation at first computation
    phi = InverseFn(xlogx())
    psi = PsiFn(phi)
    assert psi.n_min == 3
    member, margin = member_frac(3, phi, psi, "plus")
    assert not member
    assert margin == pytest.approx(-0.38745924442963575, abs=1e-12)


def test_floor_characterization_on_integer_phi():
    phi = InverseFn(x15())
    psi = PsiFn(phi)
    assert member_floor_characterization(8, phi, psi)


def test_floor_characterization_agrees_exhaustively():
    phi = InverseFn(xlogx())
    psi = PsiFn(phi)
    n = np.arange(psi.n_min, 10**5 + 1)
    via_frac, _ = member_frac(n, phi, psi, "plus")
    via_floor = member_floor_characterization(n, phi, psi)
    assert np.array_equal(via_frac, via_floor)


def test_synthetic_rejection_by_both_tests():
    # constant window 0.3 and an index whose fractional part sits 0.1 above it
    phi = InverseFn(xlogx())
    psi = ConstPsi(0.3, n_min=3)
    head, tail = phi.pair(np.arange(3.0, 5000.0))
    frac = (head - np.floor(head)) + tail
    idx = np.argmin(np.abs(frac - 0.4))
    n = int(3 + idx)
    assert abs(frac[idx] - 0.4) < 1e-2
    member, _ = member_frac(n, phi, psi, "plus")
    assert not member
    assert not member_floor_characterization(n, phi, psi)


def test_zero_window_admits_nothing():
    phi = InverseFn(xlogx())
    psi = ConstPsi(0.0, n_min=3)
    member, _ = member_frac(np.arange(3, 2000), phi, psi, "plus")
    assert not member.any()


# ------------------------------------------------------------ frac sets


def test_minus_set_equals_floor_image_small():
    h = x15()
    s = build_frac_set(SetSpec("frac_minus", h, h, 12))
    floor = build_floor_set(h, 12)
    assert s.members.tolist() == [m for m in floor.members if m >= s.n_min]


def test_minus_set_equals_floor_image_to_1e4():
    h = x15()
    s = build_frac_set(SetSpec("frac_minus", h, h, 10**4))
    floor = build_floor_set(h, 10**4)
    expected = floor.members[floor.members >= s.n_min]
    assert np.array_equal(s.members, expected)


def test_plus_set_cardinality_tracks_phi2():
    h = x15()
    s = build_frac_set(SetSpec("frac_plus", h, h, 10**4))
    ref = InverseFn(h).invert(1e4)
    assert abs(len(s) / ref - 1) < 0.10


def test_monotone_growth_and_determinism():
    h = xlogx()
    small = build_frac_set(SetSpec("frac_plus", h, h, 10**4))
    big = build_frac_set(SetSpec("frac_plus", h, h, 2 * 10**4))
    assert np.array_equal(small.members, big.restricted(10**4))
    again = build_frac_set(SetSpec("frac_plus", h, h, 10**4))
    assert np.array_equal(small.members, again.members)


def test_sparsity_decreases():
    h = xlogx()
    d3 = len(build_frac_set(SetSpec("frac_plus", h, h, 10**3))) / 10**3
    d6 = len(build_frac_set(SetSpec("frac_plus", h, h, 10**6))) / 10**6
    assert d6 < d3


def test_borderline_fraction_small():
    h = xlogx()
    s = build_frac_set(SetSpec("frac_plus", h, h, 10**5))
    assert s.borderline_fraction <= 1e-6


# -------------------------------------------------------------- counting


def test_count_ratio_moderate_n():
    h = xlogx()
    rows = count_vs_phi2(SetSpec("frac_plus", h, h, 1), [10**4, 10**5, 10**6])
    ratios = [r.ratio for r in rows]
    assert all(abs(r - 1) < 0.05 for r in ratios)
    # fitted exponent of |ratio - 1| decays
    assert rows[0].exponent < 0


def test_count_single_n_exponent_is_nan():
    h = xlogx()
    rows = count_vs_phi2(SetSpec("frac_plus", h, h, 1), [10**4])
    assert math.isnan(rows[0].exponent)


def test_count_mixed_families():
    rows = count_vs_phi2(SetSpec("frac_plus", x15(2.0), xlogx(), 1),
                         [10**4, 10**5, 10**6])
    assert rows[-1].exponent < 0
    assert abs(rows[-1].ratio - 1) < 0.05


# ------------------------------------------------------ spec admissibility


def test_admissibility_flags():
    ell2 = SlowlyVaryingSpec("constant_one")
    spec = SetSpec("frac_plus", xlogx(), RegVaryFn(1.1, ell2), 100)
    assert spec.admissible
    off = SetSpec("frac_plus", x15(), x15(), 100)
    assert not off.admissible
    assert off.admissibility_margin < 0


# ----------------------------------------------------------------- io


@pytest.mark.parametrize("suffix", [".txt", ".bin"])
def test_save_load_round_trip(tmp_path, suffix):
    h = xlogx()
    s = build_frac_set(SetSpec("frac_plus", h, h, 5000))
    p = tmp_path / f"set{suffix}"
    s.save(p)
    back = load_set(p)
    assert np.array_equal(back.members, s.members)
    assert back.n_min == s.n_min
    assert back.spec.N == s.spec.N
    assert back.spec.kind == s.spec.kind
    assert back.borderline_count == s.borderline_count
    assert back.spec.h1.to_kv() == h.to_kv()
