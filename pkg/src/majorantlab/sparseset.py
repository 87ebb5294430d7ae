"""Materialized sparse sets: floor images of h and fractional-part sets.

Two constructions of the same kind of object:

    floor_image   {floor(h(n)) : n >= x0} intersected with [1, N]
    frac_plus     {n : {phi1(n)} < psi(n)}
    frac_minus    {n : {-phi1(n)} < psi(n)}

With h1 = h2 = h and the window psi(x) = phi(x+1) - phi(x), the minus set
coincides with the floor image on [n_min, N]; both builders are kept as
independent code paths precisely so that identity can be checked.

Membership compares the fractional part of +-phi1(n) against psi(n).
Since the integer part of phi1(n) eats most of the double mantissa at
large n, phi1 is evaluated as a head/tail pair (see rvfunc.InverseFn.pair)
and the fractional part is taken on the pair.  Margins closer to zero
than a guard band (default 1e-9) are counted as borderline and reported;
the membership bit then follows the sign of the compensated margin.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compensated import frac_pair
from .errors import CapacityError
from .rvfunc import InverseFn, PsiFn, RegVaryFn
from .sweeps import StopWatch, SweepResult, fit_loglog_slope

DEFAULT_GUARD = 1e-9
DEFAULT_CAP = 1 << 28
_CHUNK = 1 << 20

KINDS = ("floor_image", "frac_plus", "frac_minus")


@dataclass(frozen=True)
class SetSpec:
    """Recipe for one sparse set."""

    kind: str
    h1: RegVaryFn
    h2: RegVaryFn
    N: int
    psi_mode: str = "difference"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown set kind {self.kind!r}")
        if self.N < 1:
            raise ValueError("N must be positive")
        if self.psi_mode not in PsiFn.MODES:
            raise ValueError(f"unknown psi mode {self.psi_mode!r}")

    @property
    def c1(self) -> float:
        return self.h1.c

    @property
    def c2(self) -> float:
        return self.h2.c

    @property
    def admissibility_margin(self) -> float:
        """1 - 3(1 - 1/c2) - (1 - 1/c1); positive iff the exponent pair is
        admissible for the quantitative theorems."""
        return 1.0 - 3.0 * (1.0 - 1.0 / self.c2) - (1.0 - 1.0 / self.c1)

    @property
    def admissible(self) -> bool:
        return (1.0 <= self.c1 < 2.0 and 1.0 <= self.c2 < 1.2
                and self.admissibility_margin > 0.0)

    def kv_items(self):
        return [("kind", self.kind), ("psi_mode", self.psi_mode), ("N", str(self.N))]


@dataclass
class SparseSet:
    """A built set; members are sorted distinct int64 in [n_min, N]."""

    spec: SetSpec
    members: np.ndarray
    n_min: int
    borderline_count: int = 0
    phi1: InverseFn | None = None
    psi: PsiFn | None = None

    def __len__(self):
        return len(self.members)

    @property
    def borderline_fraction(self) -> float:
        return self.borderline_count / max(len(self.members), 1)

    def restricted(self, N: int) -> np.ndarray:
        """Members <= N (the set construction is monotone in N)."""
        return self.members[: np.searchsorted(self.members, N, side="right")]

    # --------------------------------------------------------- export

    def _header_lines(self):
        yield "majorantlab set v1"
        yield ", ".join(f"{k}={v}" for k, v in self.spec.kv_items())
        yield "h1: " + self.spec.h1.to_kv()
        yield "h2: " + self.spec.h2.to_kv()
        yield (f"n_min={self.n_min}, count={len(self.members)}, "
               f"borderline_count={self.borderline_count}")

    def save(self, path):
        """Write the set; '.bin' suffix selects the binary layout,
        anything else the one-member-per-line text layout."""
        path = Path(path)
        if path.suffix == ".bin":
            header = "\n".join(self._header_lines()).encode()
            with open(path, "wb") as fh:
                fh.write(b"MLSET1\x00\x00")
                fh.write(struct.pack("<I", len(header)))
                fh.write(header)
                fh.write(struct.pack("<Q", len(self.members)))
                fh.write(np.ascontiguousarray(self.members, dtype="<i8").tobytes())
        else:
            with open(path, "w") as fh:
                for line in self._header_lines():
                    fh.write(f"# {line}\n")
                for m in self.members:
                    fh.write(f"{m}\n")


def load_set(path) -> SparseSet:
    path = Path(path)
    if path.suffix == ".bin":
        with open(path, "rb") as fh:
            magic = fh.read(8)
            if magic != b"MLSET1\x00\x00":
                raise ValueError("not a majorantlab binary set file")
            (hlen,) = struct.unpack("<I", fh.read(4))
            header = fh.read(hlen).decode().splitlines()
            (count,) = struct.unpack("<Q", fh.read(8))
            members = np.frombuffer(fh.read(8 * count), dtype="<i8").astype(np.int64)
    else:
        header = []
        members = []
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    header.append(line[1:].strip())
                elif line.strip():
                    members.append(int(line))
        members = np.asarray(members, dtype=np.int64)
    kv = {}
    h1 = h2 = None
    for line in header[1:]:
        if line.startswith("h1:"):
            h1 = RegVaryFn.from_kv(line[3:], check=False)
        elif line.startswith("h2:"):
            h2 = RegVaryFn.from_kv(line[3:], check=False)
        else:
            for part in line.split(","):
                k, _, v = part.strip().partition("=")
                kv[k] = v
    spec = SetSpec(kv["kind"], h1, h2, int(kv["N"]), psi_mode=kv["psi_mode"])
    return SparseSet(spec, members, int(kv["n_min"]),
                     borderline_count=int(kv.get("borderline_count", 0)))


# ------------------------------------------------------------ membership


def member_frac(n, phi1: InverseFn, psi, sign: str = "plus", guard: float = DEFAULT_GUARD):
    """Fractional-part membership test.

    Returns (member, margin) with margin = psi(n) - {sign * phi1(n)};
    membership is margin > 0.  Works on scalars and arrays.  The caller
    treats |margin| < guard as borderline.
    """
    s = 1 if sign == "plus" else -1
    n_arr = np.asarray(n, dtype=np.float64)
    head, tail = phi1.pair(n_arr)
    frac = frac_pair(head, tail, sign=s)
    margin = np.asarray(psi(n_arr), dtype=np.float64) - frac
    member = frac < np.asarray(psi(n_arr), dtype=np.float64)
    if np.ndim(n) == 0:
        return bool(member), float(margin)
    return member, margin


def member_floor_characterization(n, phi1: InverseFn, psi):
    """floor(phi1(n)) - floor(phi1(n) - psi(n)) == 1, on the value pair.

    Independent route to the same membership bit as member_frac(.., plus);
    exercised against it exhaustively in the tests.
    """
    n_arr = np.asarray(n, dtype=np.float64)
    head, tail = phi1.pair(n_arr)
    psv = np.asarray(psi(n_arr), dtype=np.float64)
    base = np.floor(head)
    r = (head - base) + tail
    f_phi = base + np.floor(r)         # floor(phi1(n))
    rs = (head - base) + (tail - psv)
    f_shift = base + np.floor(rs)      # floor(phi1(n) - psi(n))
    out = (f_phi - f_shift) == 1.0
    if np.ndim(n) == 0:
        return bool(out)
    return out


# ------------------------------------------------------------- builders


def build_floor_set(h: RegVaryFn, N: int, cap: int = DEFAULT_CAP,
                    guard: float = DEFAULT_GUARD) -> SparseSet:
    """{floor(h(n)) : n >= x0} in [1, N], sorted and deduplicated.

    h(n) is evaluated in extended precision so the floor is reliable
    whenever h(n) is farther than ~1e-11 from an integer; closer values
    are counted as borderline.
    """
    n_start = math.ceil(h.x0 - 1e-9)
    phi = InverseFn(h)
    if N + 1 < phi.y0:
        n_end = n_start - 1
    else:
        n_end = int(math.floor(phi.invert(float(N + 1))))
        ld = np.longdouble
        while n_end >= n_start and h.value_longdouble(ld(n_end)) >= ld(N + 1):
            n_end -= 1
        while h.value_longdouble(ld(n_end + 1)) < ld(N + 1):
            n_end += 1
    count = n_end - n_start + 1
    if count > cap:
        raise CapacityError(
            f"floor set build needs {count} evaluations, cap is {cap}")
    spec = SetSpec("floor_image", h, h, N)
    if count <= 0:
        return SparseSet(spec, np.empty(0, dtype=np.int64), n_min=1, phi1=phi)
    borderline = 0
    out = []
    for a in range(n_start, n_end + 1, _CHUNK):
        b = min(a + _CHUNK - 1, n_end)
        vals = h.value_longdouble(np.arange(a, b + 1, dtype=np.longdouble))
        floors = np.floor(vals)
        fr = np.asarray(vals - floors, dtype=np.float64)
        borderline += int(np.count_nonzero((fr < guard) | (fr > 1 - guard)))
        out.append(np.asarray(floors, dtype=np.int64))
    members = np.unique(np.concatenate(out))
    members = members[(members >= 1) & (members <= N)]
    n_min = int(members[0]) if len(members) else 1
    return SparseSet(spec, members, n_min=n_min, borderline_count=borderline,
                     phi1=phi, psi=None)


def _psi_values_f64(psi: PsiFn, n: np.ndarray, pairs_next=None, pairs_here=None):
    if psi.mode == "derivative":
        return psi.phi2.deriv(n, 1)
    if pairs_here is None:
        pairs_here = psi.phi2.pair(n)
    if pairs_next is None:
        pairs_next = psi.phi2.pair(n + 1.0)
    (h0, t0), (h1, t1) = pairs_here, pairs_next
    return (h1 - h0) + (t1 - t0)


def build_frac_set(spec: SetSpec, guard: float = DEFAULT_GUARD,
                   cap: int = DEFAULT_CAP) -> SparseSet:
    """Scan [n_min, N] with member_frac; deterministic, chunked."""
    if spec.kind not in ("frac_plus", "frac_minus"):
        raise ValueError("build_frac_set needs a frac_plus or frac_minus spec")
    sign = 1 if spec.kind == "frac_plus" else -1
    phi1 = InverseFn(spec.h1)
    phi2 = phi1 if spec.h2 is spec.h1 else InverseFn(spec.h2)
    psi = PsiFn(phi2, mode=spec.psi_mode)
    n_min = max(psi.n_min, math.ceil(phi1.y0 - 1e-9))
    N = spec.N
    if N - n_min + 1 > cap:
        raise CapacityError(f"frac set scan of {N - n_min + 1} exceeds cap {cap}")
    shared = phi2 is phi1 and spec.psi_mode == "difference"
    members = []
    borderline = 0
    a = n_min
    while a <= N:
        b = min(a + _CHUNK - 1, N)
        n = np.arange(a, b + 1, dtype=np.float64)
        if shared:
            heads, tails = phi1.pair(np.arange(a, b + 2, dtype=np.float64))
            head, tail = heads[:-1], tails[:-1]
            psv = (heads[1:] - heads[:-1]) + (tails[1:] - tails[:-1])
        else:
            head, tail = phi1.pair(n)
            psv = _psi_values_f64(psi, n)
        frac = frac_pair(head, tail, sign=sign)
        margin = psv - frac
        mask = margin > 0
        borderline += int(np.count_nonzero(np.abs(margin) < guard))
        members.append(np.asarray(n[mask], dtype=np.int64))
        a = b + 1
    return SparseSet(spec, np.concatenate(members) if members else
                     np.empty(0, dtype=np.int64),
                     n_min=n_min, borderline_count=borderline, phi1=phi1, psi=psi)


def build_set(spec: SetSpec, **kw) -> SparseSet:
    if spec.kind == "floor_image":
        return build_floor_set(spec.h1, spec.N, **kw)
    return build_frac_set(spec, **kw)


# ------------------------------------------------------------- counting


def count_vs_phi2(spec: SetSpec, N_list, experiment: str = "count") -> list[SweepResult]:
    """Cardinality against phi2(N) for each N, plus the fitted decay
    exponent of |ratio - 1| over the sweep (NaN for a single N)."""
    phi2 = InverseFn(spec.h2)
    rows = []
    ratios = []
    for N in N_list:
        sub = SetSpec(spec.kind, spec.h1, spec.h2, int(N), psi_mode=spec.psi_mode)
        with StopWatch() as sw:
            built = build_set(sub)
        ref = phi2.invert(float(N))
        ratio = len(built) / ref
        ratios.append(ratio)
        rows.append(SweepResult(
            experiment=experiment, quantity="cardinality_ratio",
            value=float(len(built)), reference=ref, ratio=ratio,
            wall_ms=sw.ms, borderline_count=built.borderline_count,
            params={"kind": spec.kind, "N": int(N),
                    "h1": spec.h1.to_kv(), "h2": spec.h2.to_kv(),
                    "psi_mode": spec.psi_mode,
                    "admissible": spec.admissible},
        ))
    slope = fit_loglog_slope(list(N_list), np.abs(np.asarray(ratios) - 1.0))
    for r in rows:
        r.exponent = slope
    return rows
