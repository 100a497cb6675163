"""Farey fractions of bounded height: neighbors, interval indicators,
row sums and expected hit counts.

For a reduced fraction beta = a/q with q >= 2, its neighbors are the two
fractions adjacent to it in the Farey set of order q; they satisfy
num(beta) h(lower) - num(lower) h(beta) = 1 and their heights add up to q.
The indicator chi_beta is 1 strictly between the neighbors, 1/2 at either
neighbor and 0 outside; the zero class (height 1) has chi identically 1.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .cf import DyadicStream, _euclid, compare_real_rational
from .rationals import FareyFraction, _pair

EULER_DIGITS = 40


@dataclass(frozen=True)
class NeighborPair:
    """Adjacent fractions below and above beta in the Farey set of its height.

    upper is a value in (0, 1]; the top endpoint is represented by 1/1
    (the zero class approached from below).
    """

    lower: Fraction
    upper: Fraction


def farey_neighbors(beta) -> NeighborPair:
    """Neighbors of beta in the Farey set of order h(beta)."""
    a, q = _pair(beta)
    if q == 1:
        raise ValueError("height-1 class has no neighbors; chi is identically 1")
    q_lo = pow(a, -1, q)
    p_lo = (a * q_lo - 1) // q
    q_hi = q - q_lo
    p_hi = a - p_lo
    return NeighborPair(Fraction(p_lo, q_lo), Fraction(p_hi, q_hi))


def chi(beta, x) -> Fraction:
    """Indicator of the neighbor interval of beta, evaluated at a stream x.

    Returns 1 inside (lower, upper), 1/2 at an endpoint, 0 outside;
    identically 1 for the height-1 class.
    """
    a, q = _pair(beta)
    if q == 1:
        return Fraction(1)
    nb = farey_neighbors(beta)
    c_lo = compare_real_rational(x, nb.lower)
    if c_lo < 0:
        return Fraction(0)
    if c_lo == 0:
        return Fraction(1, 2)
    c_hi = compare_real_rational(x, nb.upper)
    if c_hi > 0:
        return Fraction(0)
    if c_hi == 0:
        return Fraction(1, 2)
    return Fraction(1)


def expected_chi(beta) -> Fraction:
    """Length of the neighbor interval, 1/(h(lower) h(upper))."""
    a, q = _pair(beta)
    if q == 1:
        return Fraction(1)
    q_lo = pow(a, -1, q)
    return Fraction(1, q_lo * (q - q_lo))


def enumerate_farey(Q: int) -> Iterator[FareyFraction]:
    """Fractions of height <= Q in [0, 1), ascending, starting at 0/1."""
    if Q < 1:
        raise ValueError("Q must be >= 1")
    a, b, c, d = 0, 1, 1, Q
    yield FareyFraction(0, 1)
    while (c, d) != (1, 1):
        yield FareyFraction(c, d)
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b


def totients_up_to(Q: int) -> np.ndarray:
    """phi(q) for q = 0..Q by sieve (index 0 unused)."""
    phi = np.arange(Q + 1, dtype=np.int64)
    for p in range(2, Q + 1):
        if phi[p] == p:  # p prime
            phi[p::p] -= phi[p::p] // p
    return phi


def farey_size(Q: int) -> int:
    """Number of height <= Q classes mod 1: 1 + sum_{q=2}^{Q} phi(q)."""
    return 1 + int(totients_up_to(Q)[2:].sum())


@dataclass
class FareyTable:
    """Flat arrays over all fractions of height <= Q, for bulk chi evaluation.

    Entry 0 is the zero class; its neighbor fields are sentinels and its
    mask value is always True.  terminal[i] is the last partial quotient
    of the canonical expansion (1 for the zero class).
    """

    Q: int
    num: np.ndarray
    den: np.ndarray
    lo_f: np.ndarray
    hi_f: np.ndarray
    lo_num: np.ndarray
    lo_den: np.ndarray
    hi_num: np.ndarray
    hi_den: np.ndarray
    terminal: np.ndarray
    _index: dict | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.num)

    def index_of(self, frac: FareyFraction) -> int:
        if self._index is None:
            self._index = {(int(a), int(q)): i
                           for i, (a, q) in enumerate(zip(self.num, self.den))}
        return self._index[(frac.num, frac.den)]


_TABLE_CACHE: dict[int, FareyTable] = {}
FAREY_TABLE_LIMIT = 5000


def farey_table(Q: int) -> FareyTable:
    """Build (and cache) the bulk table for F_Q.  O(Q^2) entries."""
    if Q > FAREY_TABLE_LIMIT:
        raise ValueError(f"Q = {Q} beyond enumeration limit {FAREY_TABLE_LIMIT}")
    if Q in _TABLE_CACHE:
        return _TABLE_CACHE[Q]
    size = farey_size(Q)
    num, den, lon, lod, hin, hid, term = (np.empty(size, dtype=np.int64)
                                          for _ in range(7))
    num[0], den[0], lon[0], lod[0], hin[0], hid[0], term[0] = 0, 1, 0, 1, 1, 1, 1
    i = 1
    a, b, c, d = 0, 1, 1, Q
    while (c, d) != (1, 1):
        q_lo = pow(c, -1, d)
        p_lo = (c * q_lo - 1) // d
        num[i], den[i] = c, d
        lon[i], lod[i] = p_lo, q_lo
        hin[i], hid[i] = c - p_lo, d - q_lo
        term[i] = _euclid(c, d)[1][-1]
        i += 1
        k = (Q + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    assert i == size
    lo_f = lon.astype(np.float64) / lod.astype(np.float64)
    hi_f = hin.astype(np.float64) / hid.astype(np.float64)
    lo_f[0] = -np.inf
    hi_f[0] = np.inf
    table = FareyTable(Q=Q, num=num, den=den, lo_f=lo_f, hi_f=hi_f,
                       lo_num=lon, lo_den=lod, hi_num=hin, hi_den=hid,
                       terminal=term)
    _TABLE_CACHE[Q] = table
    return table


CHI_MARGIN = 1e-9


def chi_mask(table: FareyTable, x: DyadicStream, margin: float = CHI_MARGIN) -> np.ndarray:
    """chi values over a whole table for a dyadic stream, as a boolean mask.

    Fast float comparisons with a guard band of width `margin`; entries whose
    neighbor endpoint lands inside the band are settled exactly.  Exact for
    any margin >= a few ulps since endpoint floats are within 2^-52 relative.
    """
    lo, hi = x.interval()
    x_lo = float(lo)
    x_hi = float(hi)
    mask = (table.lo_f < x_lo - margin) & (table.hi_f > x_hi + margin)
    near = ((np.abs(table.lo_f - x_lo) <= margin) | (np.abs(table.hi_f - x_hi) <= margin)) \
        & ~np.isinf(table.lo_f)
    for i in np.nonzero(near)[0]:
        c_lo = x.compare_fraction(Fraction(int(table.lo_num[i]), int(table.lo_den[i])))
        c_hi = x.compare_fraction(Fraction(int(table.hi_num[i]), int(table.hi_den[i])))
        mask[i] = c_lo > 0 and c_hi < 0
    mask[0] = True
    return mask


_LCM_STATE = [1, 1]  # lcm(1..upper), upper
_LCM_LOCK = threading.Lock()


def _lcm_up_to(n: int) -> int:
    with _LCM_LOCK:
        while _LCM_STATE[1] < n:
            _LCM_STATE[1] += 1
            _LCM_STATE[0] = math.lcm(_LCM_STATE[0], _LCM_STATE[1])
        return _LCM_STATE[0]


def row_sum_exact(q: int) -> Fraction:
    """Sum of expected_chi over all fractions of height exactly q.

    As a/q runs over the row, the lower-neighbor heights q' run over the
    units mod q, and 1/(q'(q-q')) telescopes to (2/q) sum of 1/q'; the sum
    is assembled over one common denominator and reduced once.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if q == 1:
        return Fraction(1)
    lcm = _lcm_up_to(q - 1)
    s = sum(lcm // u for u in range(1, q) if math.gcd(u, q) == 1)
    return Fraction(2 * s, q * lcm)


_EULER_CACHE: dict[int, object] = {}


def euler_constant(digits: int = EULER_DIGITS):
    """Euler's constant by the Euler-Maclaurin series, as an mpmath float.

    gamma = H_N - ln N - 1/(2N) + sum B_{2k}/(2k N^{2k}), N = 1000, through
    k = 5; the omitted term is below 1e-31.  The harmonic number is summed
    exactly.
    """
    if digits in _EULER_CACHE:
        return _EULER_CACHE[digits]
    import mpmath

    with mpmath.workdps(digits + 10):
        N = 1000
        H = Fraction(0)
        for i in range(1, N + 1):
            H += Fraction(1, i)
        val = mpmath.mpf(H.numerator) / H.denominator - mpmath.ln(N)
        bernoulli = [Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42),
                     Fraction(-1, 30), Fraction(5, 66)]
        val -= mpmath.mpf(1) / (2 * N)
        for k, b in enumerate(bernoulli, start=1):
            term = Fraction(b, 2 * k) / N ** (2 * k)
            val += mpmath.mpf(term.numerator) / term.denominator
        result = +val
    _EULER_CACHE[digits] = result
    return result


def row_sum_formula(q: int) -> float:
    """Smooth approximation 2 phi(q)/q^2 (log q + sum_{p|q} log p/(p-1) + gamma)."""
    if q < 2:
        raise ValueError("q must be >= 2")
    fac = _factorize(q)
    phi = q
    for p in fac:
        phi = phi // p * (p - 1)
    p_term = sum(math.log(p) / (p - 1) for p in fac)
    gamma = float(euler_constant())
    return 2 * phi / q**2 * (math.log(q) + p_term + gamma)


def _factorize(q: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= q:
        while q % d == 0:
            out[d] = out.get(d, 0) + 1
            q //= d
        d += 1
    if q > 1:
        out[q] = out.get(q, 0) + 1
    return out


def cumulative_expected_count(Q: int) -> tuple[Fraction, float]:
    """(sum_{q=2}^{Q} row_sum_exact(q), (6/pi^2) log^2 Q).

    The exact part is the expected number of nonzero Farey classes of height
    <= Q hit by a uniform point; the float is the leading asymptotic term.
    """
    if Q < 2:
        raise ValueError("Q must be >= 2")
    total = Fraction(0)
    for q in range(2, Q + 1):
        total += row_sum_exact(q)
    return total, 6 / math.pi**2 * math.log(Q) ** 2


@dataclass(frozen=True)
class HeightSet:
    """Predicate over heights, from the mini-language all|primes|mod:d,r|file:path."""

    name: str
    kind: str
    payload: tuple = ()

    def mask_up_to(self, X: int) -> np.ndarray:
        """Boolean mask over q = 0..X."""
        m = np.zeros(X + 1, dtype=bool)
        if self.kind == "all":
            m[1:] = True
        elif self.kind == "primes":
            if X >= 2:
                sieve = np.ones(X + 1, dtype=bool)
                sieve[:2] = False
                for p in range(2, int(X**0.5) + 1):
                    if sieve[p]:
                        sieve[p * p::p] = False
                m = sieve
        elif self.kind == "mod":
            d, r = self.payload
            idx = np.arange(X + 1)
            m = (idx % d) == r
            m[0] = False
        elif self.kind == "set":
            for q in self.payload:
                if 0 < q <= X:
                    m[q] = True
        return m

    def __contains__(self, q: int) -> bool:
        if self.kind == "all":
            return q >= 1
        if self.kind == "primes":
            if q < 2:
                return False
            return all(q % p for p in range(2, int(q**0.5) + 1))
        if self.kind == "mod":
            d, r = self.payload
            return q >= 1 and q % d == r
        return q in self.payload


def parse_height_set(spec: str) -> HeightSet:
    if spec == "all":
        return HeightSet("all", "all")
    if spec == "primes":
        return HeightSet("primes", "primes")
    if spec.startswith("mod:"):
        d_s, _, r_s = spec[4:].partition(",")
        d, r = int(d_s), int(r_s)
        if d < 1 or not 0 <= r < d:
            raise ValueError(f"bad residue class {spec!r}")
        return HeightSet(spec, "mod", (d, r))
    if spec.startswith("file:"):
        path = spec[5:]
        with open(path) as fh:
            qs = tuple(sorted({int(tok) for tok in fh.read().split()}))
        return HeightSet(spec, "set", qs)
    raise ValueError(f"unknown height set spec {spec!r}")


def divergence_functional(heights: HeightSet, X: int) -> float:
    """sum over q <= X in the set of phi(q) log q / q^2."""
    if X < 1:
        raise ValueError("X must be >= 1")
    phi = totients_up_to(X)[2:].astype(np.float64)
    q = np.arange(2, X + 1, dtype=np.float64)
    mask = heights.mask_up_to(X)[2:]
    return float((phi[mask] * np.log(q[mask]) / q[mask] ** 2).sum())
