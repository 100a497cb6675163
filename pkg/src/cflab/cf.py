"""Continued fractions: canonical expansions, convergents, quotient streams,
height cutoffs and the intermediate-fraction enumeration.

Conventions.  An expansion is written [a0; a1, ..., aL] with all partial
quotients positive and, for rationals with L >= 1, a terminal quotient
aL >= 2; the integer 1 has the expansion [1] with L = 0.  Convergents
follow p_n = a_n p_{n-1} + p_{n-2}, q_n = a_n q_{n-1} + q_{n-2} seeded
with p_{-1} = 1, p_{-2} = 0, q_{-1} = 0, q_{-2} = 1, so p_0/q_0 = a0/1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .rationals import FareyFraction, reduce_mod1

M64 = (1 << 64) - 1
GOLDEN64 = 0x9E3779B97F4A7C15

# A certified quotient beyond this bound means the input is degenerate
# (for practical purposes, a rational fed in as a bit stream).
QUOTIENT_CAP = 1 << 63


class OutOfQuotients(Exception):
    """A terminating expansion was asked for a quotient past its end."""

    def __init__(self, length: int):
        super().__init__(f"expansion ends after {length} partial quotients")
        self.length = length


class NeedsMoreBits(Exception):
    """A comparison or certification ran out of its refinement budget."""


class QuotientCapExceeded(Exception):
    """A certified partial quotient exceeded QUOTIENT_CAP."""


def mix64(z: int) -> int:
    """SplitMix64 output scramble of a 64-bit state (Steele et al. constants)."""
    z &= M64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & M64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & M64
    z ^= z >> 31
    return z


@dataclass(frozen=True)
class ContinuedFraction:
    """Canonical finite expansion [a0; a1, ..., aL]."""

    a0: int
    quotients: tuple[int, ...] = ()

    def __post_init__(self):
        if any(a < 1 for a in self.quotients):
            raise ValueError("partial quotients must be positive")
        if self.quotients and self.quotients[-1] < 2:
            raise ValueError("canonical terminal quotient must be >= 2")

    def __str__(self) -> str:
        if not self.quotients:
            return f"[{self.a0}]"
        return f"[{self.a0};{','.join(str(a) for a in self.quotients)}]"


def _as_ratio(x) -> tuple[int, int]:
    if isinstance(x, FareyFraction):
        return x.num, x.den
    if isinstance(x, Fraction):
        return x.numerator, x.denominator
    if isinstance(x, tuple):
        return int(x[0]), int(x[1])
    if isinstance(x, int):
        return x, 1
    raise TypeError(f"not a rational: {x!r}")


def _euclid(p: int, q: int) -> tuple[int, list[int]]:
    # Plain Euclidean algorithm; the final quotient is automatically >= 2
    # whenever at least one division step happens.
    a0, r = divmod(p, q)
    qs = []
    a, b = q, r
    while b:
        k, r2 = divmod(a, b)
        qs.append(k)
        a, b = b, r2
    return a0, qs


def cf_of_rational(x) -> ContinuedFraction:
    """Canonical expansion of a rational via the Euclidean algorithm."""
    p, q = _as_ratio(x)
    if q == 0:
        raise ValueError("invalid denominator: q = 0")
    if q < 0:
        p, q = -p, -q
    a0, qs = _euclid(p, q)
    return ContinuedFraction(a0, tuple(qs))


def value_of_cf(cf: ContinuedFraction) -> Fraction:
    """Exact value of a finite expansion."""
    pm1, pm2 = 1, 0
    qm1, qm2 = 0, 1
    p, q = cf.a0 * pm1 + pm2, cf.a0 * qm1 + qm2
    for a in cf.quotients:
        pm2, pm1 = pm1, p
        qm2, qm1 = qm1, q
        p, q = a * pm1 + pm2, a * qm1 + qm2
    return Fraction(p, q)


class PartialQuotientStream:
    """A real presented by its integer part and partial quotients a_1, a_2, ..."""

    kind: str = "abstract"
    a0: int = 0

    def quotient(self, n: int) -> int:
        raise NotImplementedError


class RationalStream(PartialQuotientStream):
    """Terminating stream for a rational number."""

    kind = "rational"

    def __init__(self, p: int, q: int):
        if q == 0:
            raise ValueError("invalid denominator: q = 0")
        self.value = Fraction(p, q)
        cf = cf_of_rational(self.value)
        self.a0 = cf.a0
        self._qs = cf.quotients

    @property
    def length(self) -> int:
        return len(self._qs)

    def quotient(self, n: int) -> int:
        if n < 1:
            raise ValueError("quotient index starts at 1")
        if n > len(self._qs):
            raise OutOfQuotients(len(self._qs))
        return self._qs[n - 1]

    def __repr__(self):
        return f"RationalStream({self.value})"


class PeriodicStream(PartialQuotientStream):
    """Eventually periodic stream (a quadratic irrational)."""

    kind = "periodic"

    def __init__(self, a0: int, preperiod, period):
        self.a0 = a0
        self.preperiod = tuple(int(a) for a in preperiod)
        self.period = tuple(int(a) for a in period)
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(a < 1 for a in self.preperiod + self.period):
            raise ValueError("partial quotients must be positive")

    def quotient(self, n: int) -> int:
        if n < 1:
            raise ValueError("quotient index starts at 1")
        if n <= len(self.preperiod):
            return self.preperiod[n - 1]
        return self.period[(n - len(self.preperiod) - 1) % len(self.period)]

    def __repr__(self):
        pre = ",".join(map(str, self.preperiod))
        per = ",".join(map(str, self.period))
        return f"PeriodicStream([{self.a0};{pre}|{per}])"


class DyadicStream(PartialQuotientStream):
    """x in (0, 1) whose binary digits come from a seeded 64-bit generator.

    Block k (k = 0, 1, ...) of 64 bits is mix64((seed + (k+1)*GOLDEN64) mod 2^64),
    blocks concatenated most significant first.  The stream keeps the dyadic
    interval [X/2^B, (X+1)/2^B] containing x; a partial quotient is certified
    once the canonical expansions of both endpoints agree through its index.
    Refinement appends one 64-bit block at a time and never alters earlier
    bits, so certified quotients are stable.
    """

    kind = "dyadic"
    a0 = 0
    BLOCK = 64

    def __init__(self, seed: int, bits: int = 256):
        if not 0 <= seed <= M64:
            raise ValueError("seed must fit in 64 bits")
        if bits < 1:
            raise ValueError("bits must be positive")
        self.seed = seed
        self._X = 0
        self._B = 0
        self._blocks = 0
        self._certified: list[int] = []
        self._grow((bits + self.BLOCK - 1) // self.BLOCK)

    @property
    def bits(self) -> int:
        return self._B

    def interval(self) -> tuple[Fraction, Fraction]:
        """Current enclosing dyadic interval."""
        den = 1 << self._B
        return Fraction(self._X, den), Fraction(self._X + 1, den)

    def _grow(self, nblocks: int):
        for _ in range(nblocks):
            self._blocks += 1
            word = mix64((self.seed + self._blocks * GOLDEN64) & M64)
            self._X = (self._X << self.BLOCK) | word
            self._B += self.BLOCK
        self._certify()

    def _certify(self):
        den = 1 << self._B
        lo0, lo = _euclid(self._X, den)
        hi0, hi = _euclid(self._X + 1, den)
        if lo0 != hi0:
            return
        common = []
        for a, b in zip(lo, hi):
            if a != b:
                break
            common.append(a)
        k = len(self._certified)
        if len(common) > k:
            # Certified prefixes are true prefixes of the expansion of x,
            # hence never contradict one another.
            assert common[:k] == self._certified
            for a in common[k:]:
                if a > QUOTIENT_CAP:
                    raise QuotientCapExceeded(
                        f"partial quotient {a} exceeds sanity cap; input is degenerate"
                    )
                self._certified.append(a)

    def quotient(self, n: int, max_bits: int = 1 << 20) -> int:
        if n < 1:
            raise ValueError("quotient index starts at 1")
        while len(self._certified) < n:
            if self._B >= max_bits:
                raise NeedsMoreBits(f"quotient {n} not certified within {max_bits} bits")
            self._grow(1)
        return self._certified[n - 1]

    def certified(self) -> tuple[int, ...]:
        return tuple(self._certified)

    def compare_fraction(self, r: Fraction, max_rounds: int = 8192) -> int:
        """Sign of x - r.  The bit source is endless and not eventually
        constant, so x is interior to every enclosing interval and the
        comparison never returns 0."""
        p, q = r.numerator, r.denominator
        if q < 0:
            p, q = -p, -q
        for _ in range(max_rounds):
            if p * (1 << self._B) <= q * self._X:
                return 1
            if p * (1 << self._B) >= q * (self._X + 1):
                return -1
            self._grow(1)
        raise NeedsMoreBits(f"comparison with {r} undecided after {max_rounds} refinements")

    def __repr__(self):
        return f"DyadicStream(seed={self.seed:#x}, bits={self._B})"


Stream = Union[RationalStream, PeriodicStream, DyadicStream]


def parse_stream(spec: str) -> Stream:
    """Parse a stream spec: rational:p/q | periodic:[a0;pre|per] | dyadic:seed=S,bits=B."""
    if spec.startswith("rational:"):
        body = spec[len("rational:"):]
        p, _, q = body.partition("/")
        if not q:
            raise ValueError(f"bad rational spec {spec!r}, want rational:p/q")
        return RationalStream(int(p), int(q))
    if spec.startswith("periodic:"):
        body = spec[len("periodic:"):].strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError(f"bad periodic spec {spec!r}")
        body = body[1:-1]
        head, _, tail = body.partition(";")
        pre_s, bar, per_s = tail.partition("|")
        if not bar:
            raise ValueError(f"periodic spec needs a | separating preperiod and period: {spec!r}")
        pre = [int(t) for t in pre_s.split(",") if t.strip()]
        per = [int(t) for t in per_s.split(",") if t.strip()]
        return PeriodicStream(int(head), pre, per)
    if spec.startswith("dyadic:"):
        body = spec[len("dyadic:"):]
        fields = dict(kv.partition("=")[::2] for kv in body.split(","))
        if "seed" not in fields:
            raise ValueError(f"dyadic spec needs seed=<u64>: {spec!r}")
        seed = int(fields["seed"], 0)
        bits = int(fields.get("bits", "256"), 0)
        return DyadicStream(seed, bits=bits)
    raise ValueError(f"unknown stream spec {spec!r}")


def quotient(x, n: int) -> int:
    """Partial quotient a_n (n >= 1) of a stream or finite expansion."""
    if isinstance(x, ContinuedFraction):
        if n < 1:
            raise ValueError("quotient index starts at 1")
        if n > len(x.quotients):
            raise OutOfQuotients(len(x.quotients))
        return x.quotients[n - 1]
    return x.quotient(n)


@dataclass(frozen=True)
class ConvergentPair:
    n: int
    p: int
    q: int

    def as_fraction(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self) -> str:
        return f"{self.p}/{self.q}"


def convergents(x, n_max: int) -> list[ConvergentPair]:
    """Convergents p_n/q_n for n = 0..n_max (stopping at a terminating end)."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    pm1, pm2 = 1, 0
    qm1, qm2 = 0, 1
    p, q = x.a0, 1
    out = [ConvergentPair(0, p, q)]
    pm2, pm1, qm2, qm1 = pm1, p, qm1, q
    for n in range(1, n_max + 1):
        try:
            a = quotient(x, n)
        except OutOfQuotients:
            break
        p, q = a * pm1 + pm2, a * qm1 + qm2
        out.append(ConvergentPair(n, p, q))
        pm2, pm1, qm2, qm1 = pm1, p, qm1, q
    return out


def compare_real_rational(x, r) -> int:
    """Sign of x - r for a stream x and rational r (0 means equal)."""
    if isinstance(r, FareyFraction):
        r = r.as_fraction()
    elif not isinstance(r, Fraction):
        r = Fraction(r)
    if isinstance(x, RationalStream):
        v = x.value
        return (v > r) - (v < r)
    if isinstance(x, DyadicStream):
        return x.compare_fraction(r)
    if isinstance(x, PeriodicStream):
        return _compare_periodic(x, r)
    raise TypeError(f"not a stream: {x!r}")


def _compare_periodic(x: PeriodicStream, r: Fraction, max_terms: int = 20000) -> int:
    # Consecutive convergents bracket the (irrational) value strictly, so
    # walk until r leaves the bracket.
    pm1, pm2 = 1, 0
    qm1, qm2 = 0, 1
    p, q = x.a0, 1
    pm2, pm1, qm2, qm1 = pm1, p, qm1, q
    for n in range(1, max_terms + 1):
        a = x.quotient(n)
        p, q = a * pm1 + pm2, a * qm1 + qm2
        lo_p, lo_q, hi_p, hi_q = (pm1, qm1, p, q) if n % 2 == 1 else (p, q, pm1, qm1)
        # bracket is (lo, hi) open; compare r by cross multiplication
        if r.numerator * lo_q <= lo_p * r.denominator:
            return 1
        if r.numerator * hi_q >= hi_p * r.denominator:
            return -1
        pm2, pm1, qm2, qm1 = pm1, p, qm1, q
    raise NeedsMoreBits(f"comparison undecided after {max_terms} convergents")


@dataclass(frozen=True)
class CutoffData:
    """Level cutoff N(Q, x) and final multiplicity a(Q, x)."""

    N: int
    a: int
    terminated: bool = False


def cutoff(x, Q: int) -> CutoffData:
    """N = least n >= 0 with Q < q_n + q_{n-1}; a the unique integer with
    a q_{N-1} + q_{N-2} <= Q < (a+1) q_{N-1} + q_{N-2}.

    A rational stream that runs out of quotients first reports its terminal
    level with full multiplicity and terminated=True.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    q_nm2, q_nm1, q_n = 1, 0, 1  # q_{-2}, q_{-1}, q_0
    n = 0
    last_a = 0
    while Q >= q_n + q_nm1:
        try:
            a_next = quotient(x, n + 1)
        except OutOfQuotients:
            return CutoffData(N=n, a=last_a, terminated=True)
        n += 1
        last_a = a_next
        q_nm2, q_nm1, q_n = q_nm1, q_n, a_next * q_n + q_nm1
    a = (Q - q_nm2) // q_nm1
    return CutoffData(N=n, a=a)


@dataclass(frozen=True)
class Intermediate:
    """One member of the intermediate-fraction set: level n, index m."""

    fraction: FareyFraction
    level: int
    index: int
    height: int


def intermediates(x, Q: int) -> list[Intermediate]:
    """All intermediate fractions of x with height at most Q.

    Level n contributes (m p_{n-1} + p_{n-2}) / (m q_{n-1} + q_{n-2}) for
    m = 1..a_n, the cutoff level truncated at m = a(Q, x).  The enumeration
    order has strictly increasing heights; the m = 1 element of level 1 is
    the zero class (stored 0/1, the class of the integer a0 + 1).
    """
    cut = cutoff(x, Q)
    out: list[Intermediate] = []
    if cut.N == 0:
        return out
    pm2, pm1 = 1, x.a0     # p_{-1}, p_0
    qm2, qm1 = 0, 1        # q_{-1}, q_0
    last_height = 0
    for n in range(1, cut.N + 1):
        mult = cut.a if n == cut.N else quotient(x, n)
        for m in range(1, mult + 1):
            num = m * pm1 + pm2
            den = m * qm1 + qm2
            frac = reduce_mod1(num, den)
            assert den > last_height
            last_height = den
            out.append(Intermediate(frac, n, m, den))
        if n < cut.N:
            pm2, pm1 = pm1, mult * pm1 + pm2
            qm2, qm1 = qm1, mult * qm1 + qm2
    return out
