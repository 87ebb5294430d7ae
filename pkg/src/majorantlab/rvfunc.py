"""Regularly varying functions h(x) = x^c * ell(x), inverses, and the window psi.

Supported slowly varying factors, each with its logarithmic-derivative
kernel theta(x) = x * ell'(x) / ell(x) in closed form:

    log_power       ell(x) = (log x)^B            theta(x) = B / log x
    exp_log_power   ell(x) = exp(B (log x)^C)     theta(x) = B C (log x)^(C-1)
    iterated_log    ell(x) = l_m(x)               theta(x) = 1 / (l_1 ... l_m)(x)
    constant_one    ell(x) = 1                    theta(x) = 0

with l_1 = log and l_{m+1} = log . l_m.  Derivatives of ell and h follow
from the exp-chain rule: with u = theta/x (the log-derivative of ell),

    ell'/ell   = u
    ell''/ell  = u' + u^2
    ell'''/ell = u'' + 3 u u' + u^3

and likewise for h with u replaced by v = (c + theta)/x.  Inverses are
computed with a safeguarded Newton iteration; an extended-precision
residual correction yields head/tail value pairs accurate enough to take
fractional parts of phi(n) for n up to ~1e8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError

_KINDS = ("log_power", "exp_log_power", "iterated_log", "constant_one")

# kinds whose ell is positive, eventually increasing to infinity
_UNBOUNDED_KINDS = ("log_power", "exp_log_power", "iterated_log")


def _as_array(x):
    a = np.asarray(x, dtype=np.float64)
    return a, a.ndim == 0


def _ret(a, scalar):
    return float(a) if scalar else a


@dataclass(frozen=True)
class SlowlyVaryingSpec:
    """One member of the slowly varying families above.

    x0 is the left endpoint of the domain: the smallest power of two >= 2
    at which ell is defined and positive (auto-computed when omitted).
    """

    kind: str
    B: float = 1.0
    C: float = 0.5
    m: int = 1
    x0: float = field(default=0.0)

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown slowly varying kind {self.kind!r}")
        if self.kind in ("log_power", "exp_log_power") and not self.B > 0:
            raise ValueError("B must be positive")
        if self.kind == "exp_log_power" and not 0 < self.C < 1:
            raise ValueError("C must lie in (0, 1)")
        if self.kind == "iterated_log" and (self.m < 1 or self.m != int(self.m)):
            raise ValueError("m must be a positive integer")
        if self.x0 == 0.0:
            object.__setattr__(self, "x0", self._find_x0())
        elif self.x0 < 2:
            raise ValueError("x0 must be >= 2")

    def _find_x0(self) -> float:
        x0 = 2.0
        for _ in range(64):
            with np.errstate(all="ignore"):
                v = self._ell_raw(np.float64(x0))
            if np.isfinite(v) and v > 0:
                return x0
            x0 *= 2.0
        raise ValueError("could not locate a valid domain start")

    # -- raw evaluations, no domain checks (used by the x0 search) --------

    def _ell_raw(self, x):
        if self.kind == "log_power":
            return np.log(x) ** self.B
        if self.kind == "exp_log_power":
            return np.exp(self.B * np.log(x) ** self.C)
        if self.kind == "iterated_log":
            v = np.log(x)
            for _ in range(self.m - 1):
                v = np.log(v)
            return v
        return np.ones_like(np.asarray(x, dtype=np.float64))

    def _check(self, x):
        if np.any(x < self.x0 * (1 - 1e-12)):
            raise DomainError(f"x below domain start {self.x0} of {self}")

    def ell(self, x):
        """Value of the slowly varying factor."""
        x, scalar = _as_array(x)
        self._check(x)
        return _ret(self._ell_raw(x), scalar)

    def ell_longdouble(self, x):
        """ell evaluated in extended precision; x must be a longdouble array."""
        if self.kind == "log_power":
            return np.log(x) ** np.longdouble(self.B)
        if self.kind == "exp_log_power":
            return np.exp(np.longdouble(self.B) * np.log(x) ** np.longdouble(self.C))
        if self.kind == "iterated_log":
            v = np.log(x)
            for _ in range(self.m - 1):
                v = np.log(v)
            return v
        return np.ones_like(x)

    def theta(self, x, order: int = 0):
        """The kernel theta = x ell'/ell and its first two derivatives."""
        x, scalar = _as_array(x)
        self._check(x)
        if order not in (0, 1, 2):
            raise ValueError("theta order must be 0, 1 or 2")
        return _ret(self._theta_raw(x, order), scalar)

    def _theta_raw(self, x, order):
        t = np.log(x)
        if self.kind == "constant_one":
            return np.zeros_like(x)
        if self.kind == "log_power":
            B = self.B
            if order == 0:
                return B / t
            if order == 1:
                return -B / (x * t**2)
            return B * (t + 2) / (x**2 * t**3)
        if self.kind == "exp_log_power":
            B, C = self.B, self.C
            if order == 0:
                return B * C * t ** (C - 1)
            if order == 1:
                return B * C * (C - 1) * t ** (C - 2) / x
            return B * C * (C - 1) * t ** (C - 3) * ((C - 2) - t) / x**2
        # iterated_log: theta = 1/Q_m with Q_j = l_1 * ... * l_j
        Q = []
        v = t
        q = v.copy()
        Q.append(q.copy())
        for _ in range(self.m - 1):
            v = np.log(v)
            q = q * v
            Q.append(q.copy())
        Qm = Q[-1]
        if order == 0:
            return 1.0 / Qm
        # A = Q_m'/Q_m = sum_j 1/(x Q_j); A_j the same truncated at j
        inv_xQ = [1.0 / (x * Qj) for Qj in Q]
        A = np.sum(inv_xQ, axis=0)
        if order == 1:
            return -A / Qm
        Apartial = np.cumsum(inv_xQ, axis=0)  # A_j rows
        T = np.sum([1.0 / Qj for Qj in Q], axis=0)
        Aprime = -T / x**2 - np.sum(
            [Apartial[j] / Q[j] for j in range(self.m)], axis=0
        ) / x
        return (A * A - Aprime) / Qm

    def ell_deriv(self, x, order: int = 0):
        """d^order/dx^order ell(x) for order in 0..3."""
        x, scalar = _as_array(x)
        self._check(x)
        if order == 0:
            return _ret(self._ell_raw(x), scalar)
        th0 = self._theta_raw(x, 0)
        u0 = th0 / x
        if order == 1:
            return _ret(self._ell_raw(x) * u0, scalar)
        th1 = self._theta_raw(x, 1)
        u1 = th1 / x - th0 / x**2
        if order == 2:
            return _ret(self._ell_raw(x) * (u1 + u0**2), scalar)
        if order == 3:
            th2 = self._theta_raw(x, 2)
            u2 = th2 / x - 2 * th1 / x**2 + 2 * th0 / x**3
            return _ret(self._ell_raw(x) * (u2 + 3 * u0 * u1 + u0**3), scalar)
        raise ValueError("order must be in 0..3")

    def kv_items(self):
        items = [("family", self.kind)]
        if self.kind in ("log_power", "exp_log_power"):
            items.append(("B", format(self.B, "g")))
        if self.kind == "exp_log_power":
            items.append(("C", format(self.C, "g")))
        if self.kind == "iterated_log":
            items.append(("m", str(self.m)))
        return items


class RegVaryFn:
    """Increasing convex h(x) = x^c * ell(x) on [x0, infinity).

    The domain start is the smallest power of two >= the ell domain start
    at which h' > 0 and h'' >= 0 hold on a log-spaced probe grid, so every
    instance is increasing and convex by construction.  With c == 1 the
    slowly varying factor must be one of the unbounded kinds; pass
    check=False to build degenerate objects (e.g. the identity) for
    calibration purposes.
    """

    def __init__(self, c: float, ell: SlowlyVaryingSpec, x0: float | None = None,
                 check: bool = True):
        if not 0 < c < 2:
            raise ValueError("exponent c must lie in (0, 2)")
        if check and c == 1.0 and ell.kind not in _UNBOUNDED_KINDS:
            raise ValueError("c = 1 requires a slowly varying factor growing to infinity")
        self.c = float(c)
        self.ell = ell
        if x0 is None:
            self.x0 = self._find_x0()
        else:
            # explicit starts below 2 are allowed (e.g. pure powers from 1)
            # provided h is still increasing and convex there
            if x0 < 1:
                raise ValueError("x0 must be >= 1")
            self.x0 = float(x0)
            if check:
                self._validate_domain_start()

    def _validate_domain_start(self):
        grid = np.exp(np.linspace(np.log(self.x0), np.log(max(1e12, 16 * self.x0)), 96))
        with np.errstate(all="ignore"):
            d0 = self._deriv_raw(grid, 0)
            d1 = self._deriv_raw(grid, 1)
            d2 = self._deriv_raw(grid, 2)
        floor = -1e-13 * np.abs(d0) / grid**2
        ok = (np.isfinite(d0).all() and np.isfinite(d1).all()
              and np.isfinite(d2).all() and (d0 > 0).all()
              and (d1 > 0).all() and (d2 >= floor).all())
        if not ok:
            raise ValueError(f"h is not increasing and convex from x0={self.x0}")

    def _find_x0(self) -> float:
        x0 = self.ell.x0
        for _ in range(40):
            grid = np.exp(np.linspace(np.log(x0), np.log(max(1e12, 16 * x0)), 96))
            with np.errstate(all="ignore"):
                d0 = self._deriv_raw(grid, 0)
                d1 = self._deriv_raw(grid, 1)
                d2 = self._deriv_raw(grid, 2)
            # h'' is assembled from terms of size ~ h/x^2, so "nonnegative"
            # means nonnegative up to that roundoff scale
            floor = -1e-13 * np.abs(d0) / grid**2
            if (np.isfinite(d1).all() and np.isfinite(d2).all()
                    and (d1 > 0).all() and (d2 >= floor).all()):
                return x0
            x0 *= 2.0
        raise ValueError("no domain start with h increasing and convex found")

    def value(self, x):
        return self.deriv(x, 0)

    __call__ = value

    def deriv(self, x, order: int = 0):
        """h and its derivatives up to order 3, closed form per family."""
        x, scalar = _as_array(x)
        if np.any(x < self.x0 * (1 - 1e-12)):
            raise DomainError(f"x below domain start {self.x0}")
        with np.errstate(over="ignore"):
            out = self._deriv_raw(x, order)
        if not np.all(np.isfinite(out)):
            raise OverflowError("h evaluation left the representable range")
        return _ret(out, scalar)

    def _deriv_raw(self, x, order):
        h = x**self.c * self.ell._ell_raw(x)
        if order == 0:
            return h
        th0 = self.ell._theta_raw(x, 0)
        v0 = (self.c + th0) / x
        if order == 1:
            return h * v0
        th1 = self.ell._theta_raw(x, 1)
        v1 = th1 / x - (self.c + th0) / x**2
        if order == 2:
            return h * (v1 + v0**2)
        if order == 3:
            th2 = self.ell._theta_raw(x, 2)
            v2 = th2 / x - 2 * th1 / x**2 + 2 * (self.c + th0) / x**3
            return h * (v2 + 3 * v0 * v1 + v0**3)
        raise ValueError("order must be in 0..3")

    def value_longdouble(self, x):
        """h evaluated in extended precision on a longdouble array."""
        x = np.asarray(x, dtype=np.longdouble)
        if self.c == 1.0:
            p = x
        else:
            p = x ** np.longdouble(self.c)
        return p * self.ell.ell_longdouble(x)

    # -- flat key=value serialization -------------------------------------

    def to_kv(self) -> str:
        items = self.ell.kv_items()
        items.append(("c", format(self.c, "g")))
        items.append(("x0", format(self.x0, "g")))
        return ", ".join(f"{k}={v}" for k, v in items)

    @classmethod
    def from_kv(cls, text: str, check: bool = True) -> "RegVaryFn":
        kv = {}
        for part in text.replace("\n", ",").split(","):
            part = part.strip()
            if not part:
                continue
            k, _, v = part.partition("=")
            kv[k.strip()] = v.strip()
        kind = kv.get("family", "log_power")
        ell = SlowlyVaryingSpec(
            kind,
            B=float(kv.get("B", 1.0)),
            C=float(kv.get("C", 0.5)),
            m=int(kv.get("m", 1)),
        )
        return cls(float(kv.get("c", 1.0)), ell,
                   x0=float(kv["x0"]) if "x0" in kv else None, check=check)

    def __repr__(self):
        return f"RegVaryFn({self.to_kv()})"


class InverseFn:
    """The inverse phi of a RegVaryFn, with derivatives up to order 3."""

    def __init__(self, source: RegVaryFn):
        self.source = source
        self.y0 = source.value(source.x0)

    def _check(self, y):
        if np.any(y < self.y0 * (1 - 1e-12) - 1e-12):
            raise DomainError(f"y below h(x0) = {self.y0}")

    def invert(self, y):
        """Solve h(x) = y to |h(x) - y| <= max(1e-14 y, 1e-14).

        Safeguarded Newton: iterates leaving the current bracket are
        replaced by its geometric midpoint; h monotone makes this always
        terminate.  Deterministic.
        """
        y, scalar = _as_array(y)
        self._check(y)
        x = self._newton(np.maximum(y, self.y0))
        return _ret(x, scalar)

    __call__ = invert

    def _newton(self, y):
        h = self.source
        lo = np.full_like(y, h.x0)
        hi = np.maximum(2 * h.x0, np.asarray(y, dtype=np.float64).copy())
        for _ in range(200):
            bad = h._deriv_raw(hi, 0) < y
            if not bad.any():
                break
            hi = np.where(bad, hi * 2, hi)
        else:
            raise ConvergenceError("could not bracket the inverse")
        tol = np.maximum(1e-14 * y, 1e-14)
        x = np.sqrt(lo * hi)
        for _ in range(60):
            fx = h._deriv_raw(x, 0) - y
            if np.all(np.abs(fx) <= tol):
                return x
            above = fx > 0
            hi = np.where(above, x, hi)
            lo = np.where(above, lo, x)
            xn = x - fx / h._deriv_raw(x, 1)
            outside = ~np.isfinite(xn) | (xn <= lo) | (xn >= hi)
            x = np.where(outside, np.sqrt(lo * hi), xn)
        fx = h._deriv_raw(x, 0) - y
        if np.all(np.abs(fx) <= tol):
            return x
        raise ConvergenceError("inverse iteration stalled", last=x, previous=fx)

    def pair(self, y):
        """phi(y) as a head/tail pair of doubles.

        One extended-precision residual correction on top of the double
        Newton solve; the pair represents phi(y) with absolute error about
        1e-19 * y / h'(phi), small enough that fractional parts keep ~1e-11
        accuracy even at y ~ 1e8.
        """
        y, scalar = _as_array(y)
        self._check(y)
        yc = np.maximum(y, self.y0)
        head = self._newton(yc)
        r = np.asarray(yc, dtype=np.longdouble) - self.source.value_longdouble(head)
        tail = np.asarray(r, dtype=np.float64) / self.source._deriv_raw(head, 1)
        if scalar:
            return float(head), float(tail)
        return head, tail

    def deriv(self, y, order: int = 1):
        """phi', phi'' or phi''' via the inverse-function theorem."""
        y, scalar = _as_array(y)
        self._check(y)
        x = self._newton(np.maximum(y, self.y0))
        h1 = self.source._deriv_raw(x, 1)
        if order == 1:
            return _ret(1.0 / h1, scalar)
        h2 = self.source._deriv_raw(x, 2)
        if order == 2:
            return _ret(-h2 / h1**3, scalar)
        if order == 3:
            h3 = self.source._deriv_raw(x, 3)
            return _ret((3 * h2**2 - h1 * h3) / h1**5, scalar)
        raise ValueError("order must be 1, 2 or 3")

    def sigma1_hat(self, y):
        """Empirical curvature factor x^2 |phi''(x)| / phi(x).

        For a pure power h = x^c this is the constant |gamma (gamma-1)|
        with gamma = 1/c.  Callers working with c > 1 conventionally
        replace it by 1.
        """
        y, scalar = _as_array(y)
        self._check(y)
        x = self._newton(np.maximum(y, self.y0))
        h1 = self.source._deriv_raw(x, 1)
        h2 = self.source._deriv_raw(x, 2)
        phi2 = -h2 / h1**3
        return _ret(y**2 * np.abs(phi2) / x, scalar)


class PsiFn:
    """Membership window psi, either phi2(x+1) - phi2(x) or phi2'(x).

    n_min is the first integer at which psi <= 1/2 (psi is decreasing for
    every supported family since h is convex); sets are built from n_min
    on so that the window hypothesis holds on the whole index range.
    """

    MODES = ("difference", "derivative")

    def __init__(self, phi2: InverseFn, mode: str = "difference"):
        if mode not in self.MODES:
            raise ValueError(f"unknown psi mode {mode!r}")
        self.phi2 = phi2
        self.mode = mode
        self.n_min = self._find_n_min()

    def _raw(self, x, order=0):
        if self.mode == "derivative":
            return self.phi2.deriv(x, order + 1)
        if order == 0:
            h0, t0 = self.phi2.pair(x)
            h1, t1 = self.phi2.pair(x + 1.0)
            return (h1 - h0) + (t1 - t0)
        return self.phi2.deriv(x + 1.0, order) - self.phi2.deriv(x, order)

    def _find_n_min(self) -> int:
        n = max(2, math.ceil(self.phi2.y0 - 1e-9))
        if self._raw(float(n)) <= 0.5:
            return n
        lo = n
        hi = n
        for _ in range(62):
            hi *= 2
            if self._raw(float(hi)) <= 0.5:
                break
            lo = hi
        else:
            raise ConvergenceError("psi never drops below 1/2")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._raw(float(mid)) <= 0.5:
                hi = mid
            else:
                lo = mid
        return hi

    def value(self, x, order: int = 0):
        x, scalar = _as_array(x)
        if np.any(x < self.n_min):
            raise DomainError(f"x below n_min = {self.n_min}")
        if order not in (0, 1, 2):
            raise ValueError("psi order must be 0, 1 or 2")
        return _ret(self._raw(x, order), scalar)

    __call__ = value
