"""Weighted counting of intermediate fractions and classical quotient statistics.

The weighted count M_Q(x) = sum over height <= Q classes of c(beta) chi_beta(x),
with c(beta) = g(terminal partial quotient of beta), is computed three
independent ways: by brute-force Farey enumeration, by walking the
intermediate fractions of x, and by a closed form in the partial quotients.
For weights with rational values the three results are exact and must agree.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .cf import DyadicStream, cf_of_rational, cutoff, intermediates, quotient
from .farey import chi, chi_mask, enumerate_farey, farey_table
from .rationals import _pair

LOG2 = math.log(2)


@dataclass(frozen=True)
class WeightFunction:
    """Multiplicity weight g on positive integers.

    Families: power (g(m) = m^(-(1/2+gamma)), evaluated in extended 80-bit
    precision and rounded to the nearest long double), harmonic (1/m),
    unit (1), table (finite list of rationals, zero beyond).
    """

    family: str
    gamma: float | None = None
    table: tuple[Fraction, ...] = ()

    @staticmethod
    def harmonic() -> "WeightFunction":
        return WeightFunction("harmonic")

    @staticmethod
    def unit() -> "WeightFunction":
        return WeightFunction("unit")

    @staticmethod
    def power(gamma: float) -> "WeightFunction":
        if not gamma > 0:
            raise ValueError("power family needs gamma > 0")
        return WeightFunction("power", gamma=gamma)

    @staticmethod
    def from_table(values: Sequence) -> "WeightFunction":
        return WeightFunction("table", table=tuple(Fraction(v) for v in values))

    @property
    def is_exact(self) -> bool:
        return self.family != "power"

    def __call__(self, m: int):
        if m < 1:
            raise ValueError("weights are defined on positive integers")
        if self.family == "harmonic":
            return Fraction(1, m)
        if self.family == "unit":
            return Fraction(1)
        if self.family == "table":
            return self.table[m - 1] if m <= len(self.table) else Fraction(0)
        return np.longdouble(m) ** np.longdouble(-(0.5 + self.gamma))

    def sum_to(self, k: int, start: int = 2):
        """Prefix sum of g over start..k (empty when k < start)."""
        if k < start:
            return self._zero()
        cache = _PREFIX_CACHE.setdefault((self, start), [self._zero()])
        if len(cache) < k - start + 2:
            with _PREFIX_LOCK:
                while len(cache) < k - start + 2:
                    m = start + len(cache) - 1
                    cache.append(cache[-1] + self(m))
        return cache[k - start + 1]

    def sum_to_float(self, k: int, start: int = 2) -> float:
        """Float prefix sum of g over start..k, via a cached cumulative array.

        Meant for large-k bookkeeping where exact prefix sums are infeasible
        (an exact harmonic prefix of length 10^5 has a denominator with tens
        of thousands of digits).
        """
        if k < start:
            return 0.0
        if self.family == "unit":
            return float(k - start + 1)
        if self.family == "table":
            return float(self.sum_to(k, start))
        with _PREFIX_LOCK:
            arr = _FLOAT_PREFIX_CACHE.get((self, start))
            if arr is None or len(arr) < k - start + 1:
                size = max(1024, 2 * (k - start + 1))
                m = np.arange(start, start + size, dtype=np.longdouble)
                vals = 1.0 / m if self.family == "harmonic" else m ** np.longdouble(-(0.5 + self.gamma))
                arr = np.cumsum(vals)
                _FLOAT_PREFIX_CACHE[(self, start)] = arr
        return float(arr[k - start])

    def _zero(self):
        return Fraction(0) if self.is_exact else np.longdouble(0)

    def spec(self) -> str:
        if self.family == "power":
            return f"power:{self.gamma:g}"
        if self.family == "table":
            return f"table:<{len(self.table)} entries>"
        return self.family


_PREFIX_CACHE: dict = {}
_FLOAT_PREFIX_CACHE: dict = {}
_PREFIX_LOCK = threading.Lock()


def parse_weight(spec: str) -> WeightFunction:
    """Parse a weight spec: power:<gamma> | harmonic | unit | table:<path>.

    A table file holds one `m value` pair per line, values as p/q or
    decimal strings; unlisted m up to the largest listed get weight 0.
    """
    if spec == "harmonic":
        return WeightFunction.harmonic()
    if spec == "unit":
        return WeightFunction.unit()
    if spec.startswith("power:"):
        return WeightFunction.power(float(spec[6:]))
    if spec.startswith("table:"):
        path = spec[6:]
        entries: dict[int, Fraction] = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                m_s, val_s = line.split()
                m = int(m_s)
                if m < 1 or m in entries:
                    raise ValueError(f"bad weight table line {line!r}")
                entries[m] = Fraction(val_s)
        if not entries:
            raise ValueError(f"empty weight table {path!r}")
        top = max(entries)
        return WeightFunction.from_table([entries.get(m, Fraction(0))
                                          for m in range(1, top + 1)])
    raise ValueError(f"unknown weight spec {spec!r}")


def terminal_quotient(beta) -> int:
    """Last partial quotient of the canonical expansion of beta.

    The zero class counts as the expansion [1] of the representative 1,
    so its terminal quotient is 1.
    """
    a, q = _pair(beta)
    if q == 1:
        return 1
    return cf_of_rational((a, q)).quotients[-1]


def weight_c(beta, g: WeightFunction):
    """c(beta) = g evaluated at the terminal partial quotient of beta."""
    return g(terminal_quotient(beta))


def mq_via_intermediates(x, Q: int, g: WeightFunction):
    """M_Q(x) summed over the intermediate fractions of x, each reweighed
    through its own canonical expansion."""
    total = g._zero()
    for rec in intermediates(x, Q):
        total = total + weight_c(rec.fraction, g)
    return total


def mq_closed_form(x, Q: int, g: WeightFunction):
    """M_Q(x) = g(1) + sum_{n<N} sum_{m=2}^{a_n+1} g(m) + sum_{m=2}^{a(Q,x)} g(m).

    Pure quotient bookkeeping; no fraction is materialized.  For a rational
    x that terminates before the cutoff the same form is used with the full
    terminal multiplicity.
    """
    cut = cutoff(x, Q)
    if cut.N == 0:
        return g._zero()
    total = g(1)
    for n in range(1, cut.N):
        total = total + g.sum_to(quotient(x, n) + 1)
    return total + g.sum_to(cut.a)


def mq_via_farey(x, Q: int, g: WeightFunction):
    """M_Q(x) by enumerating every height <= Q class and testing chi.

    Dyadic streams go through the vectorized table; other streams walk the
    enumeration with scalar chi (and may pick up weight-1/2 endpoint hits
    when x is rational).
    """
    if isinstance(x, DyadicStream):
        table = farey_table(Q)
        mask = chi_mask(table, x)
        counts = np.bincount(table.terminal[mask])
        if g.is_exact:
            total = Fraction(0)
            for m in np.nonzero(counts)[0]:
                total += int(counts[m]) * g(int(m))
            return total
        total = np.longdouble(0)
        for m in np.nonzero(counts)[0]:
            total += int(counts[m]) * g(int(m))
        return total
    total = g._zero()
    for beta in enumerate_farey(Q):
        ind = chi(beta, x)
        if ind:
            w = weight_c(beta, g)
            total = total + (w * ind if g.is_exact else w * np.longdouble(float(ind)))
    return total


def mq_all(x, Q: int, g: WeightFunction, oracle_limit: int = 3000):
    """(farey, intermediates, closed, agree): the Farey route is skipped
    (None) above oracle_limit; agreement is exact for exact weights and
    within 1e-9 relative otherwise."""
    by_closed = mq_closed_form(x, Q, g)
    by_inter = mq_via_intermediates(x, Q, g)
    by_farey = mq_via_farey(x, Q, g) if Q <= oracle_limit else None
    vals = [v for v in (by_farey, by_inter, by_closed) if v is not None]
    if g.is_exact:
        agree = all(v == vals[0] for v in vals)
    else:
        ref = float(vals[0])
        agree = all(math.isclose(float(v), ref, rel_tol=1e-9, abs_tol=1e-12) for v in vals)
    return by_farey, by_inter, by_closed, agree


def _series_tail(s0: float, M: int, kmax: int = 8) -> tuple[float, float]:
    """(tail, bound) for sum_{m>M} m^-s0 log(1+1/m) via the alternating
    expansion log(1+1/m) = sum_k (-1)^(k+1)/(k m^k) and Hurwitz zeta tails;
    the bound is the first omitted term."""
    import mpmath

    with mpmath.workdps(30):
        tail = mpmath.mpf(0)
        for k in range(1, kmax + 1):
            term = mpmath.zeta(s0 + k, M + 1) / k
            tail += term if k % 2 == 1 else -term
        bound = mpmath.zeta(s0 + kmax + 1, M + 1) / (kmax + 1)
        return float(tail), float(bound)


def weight_log_series(g: WeightFunction, start: int = 1, shift: int = 0,
                      head: int = 4096) -> tuple[float, float]:
    """(value, tail_bound) for sum_{m>=start} g(m+shift) log(1+1/m).

    The unshifted series gets a Hurwitz-zeta tail (bound far below 1e-10);
    the shifted variant sums a long head and bounds the remainder by
    integral comparison.  Raises ValueError for unit weights (divergent).
    """
    if g.family == "unit":
        raise ValueError("series diverges for unit weights")
    if g.family == "table":
        total = 0.0
        for m in range(start, len(g.table) + 1 - shift):
            total += float(g(m + shift)) * math.log1p(1.0 / m)
        return total, 0.0
    s0 = 1.0 if g.family == "harmonic" else 0.5 + g.gamma
    head_sum = math.fsum(float(g(m + shift)) * math.log1p(1.0 / m)
                         for m in range(start, head + 1))
    if shift == 0:
        tail, bound = _series_tail(s0, head)
        return head_sum + tail, bound
    # shifted series: terms are below m^-(1+s0), so the tail past ext is
    # bounded by the integral ext^-s0 / s0
    ext = 2_000_000
    mid = math.fsum(float(g(m + shift)) * math.log1p(1.0 / m)
                    for m in range(head + 1, ext + 1))
    return head_sum + mid, ext ** -s0 / s0


def main_term(g: WeightFunction, Q: float, cutoff_m: int | None = None) -> float:
    """Predicted main term for M_Q: (12/pi^2) (sum_m g(m) log(1+1/m)) log Q.

    With cutoff_m = None the series runs over all m >= 1 (tail bounded below
    1e-10); an integer cutoff gives the truncated variant summing m = 2..cutoff_m.
    """
    if Q <= 1:
        raise ValueError("Q must exceed 1")
    if cutoff_m is None:
        series, _ = weight_log_series(g, start=1)
    else:
        series = math.fsum(float(g(m)) * math.log1p(1.0 / m)
                           for m in range(2, cutoff_m + 1))
    return 12 / math.pi**2 * series * math.log(Q)


def mq_level_expectation(g: WeightFunction) -> float:
    """Expected weight contributed by one full level under the limiting
    quotient law: sum_{m>=1} g(m+1) log2(1+1/m).

    This is the per-level mean implied by the exact closed form (the m = 1
    member of level n carries g(a_{n-1}+1), not g(1)); it differs from the
    unshifted series sum_m g(m) log2(1+1/m) for non-constant g.
    """
    value, _ = weight_log_series(g, start=1, shift=1)
    return value / LOG2


def indicator_sum(x, m: int, n: int) -> int:
    """Number of indices i <= n with a_i(x) >= m."""
    if m < 1 or n < 0:
        raise ValueError("need m >= 1 and n >= 0")
    return sum(1 for i in range(1, n + 1) if quotient(x, i) >= m)


@dataclass(frozen=True)
class TruncationFn:
    """f(n) = floor(n (log n)^(1/2+delta)), with f(1) = 1."""

    delta: float

    def __call__(self, n: int) -> int:
        if n < 1:
            raise ValueError("n must be >= 1")
        if n == 1:
            return 1
        return int(n * math.log(n) ** (0.5 + self.delta))


def x_nf(x, n: int, g: WeightFunction, f: TruncationFn):
    """X_{n,f} = sum_{m=2}^{f(n)} g(m) #{i <= n : a_i >= m}.

    Computed as sum over i of the prefix sums of g up to min(a_i, f(n)).
    """
    top = f(n)
    total = g._zero()
    for i in range(1, n + 1):
        a_i = quotient(x, i)
        total = total + g.sum_to(min(a_i, top))
    return total


def gauss_kuzmin_prob(k: int) -> float:
    """Limiting probability log2(1 + 1/(k(k+2))) of a partial quotient equal to k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return math.log1p(1.0 / (k * (k + 2))) / LOG2


@dataclass(frozen=True)
class BirkhoffResult:
    average: object
    reference: float | None


def birkhoff_average(x, fvals: Callable[[int], object], n: int,
                     ref_terms: int | None = None) -> BirkhoffResult:
    """Cesaro average (1/n) sum_{k<=n} fvals(a_k), with an optional reference
    value sum_r fvals(r) log2(1+1/(r(r+2))) truncated at ref_terms (the
    caller asserts the tail of fvals is summable)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 0
    for k in range(1, n + 1):
        total = total + fvals(quotient(x, k))
    avg = total / n
    ref = None
    if ref_terms is not None:
        ref = math.fsum(float(fvals(r)) * gauss_kuzmin_prob(r)
                        for r in range(1, ref_terms + 1))
    return BirkhoffResult(avg, ref)


@dataclass(frozen=True)
class ClassicalStats:
    """log q_n / n together with the running sum and max of the quotients."""

    n: int
    levy_stat: float
    pq_sum: int
    pq_max: int
    q_n: int


def classical_stats(x, n: int) -> ClassicalStats:
    if n < 1:
        raise ValueError("n must be >= 1")
    q_nm1, q_n = 0, 1
    pq_sum = 0
    pq_max = 0
    for i in range(1, n + 1):
        a = quotient(x, i)
        pq_sum += a
        pq_max = max(pq_max, a)
        q_nm1, q_n = q_n, a * q_n + q_nm1
    return ClassicalStats(n, math.log(q_n) / n, pq_sum, pq_max, q_n)


def double_exceedance(x, M: int, delta: float) -> int:
    """#{i <= M : a_i > M (log M)^(1/2+delta)}."""
    if M < 1:
        raise ValueError("M must be >= 1")
    threshold = M * math.log(M) ** (0.5 + delta) if M > 1 else 0.0
    return sum(1 for i in range(1, M + 1) if quotient(x, i) > threshold)


@dataclass(frozen=True)
class HypothesisReport:
    """Summability and growth diagnostics for a weight function."""

    sum_g_over_m: float | None
    divergent: bool
    trajectory: tuple[float, ...]


def hypothesis_check(g: WeightFunction, delta: float, n_max: int) -> HypothesisReport:
    """Check sum_m g(m)/m (closed form per family) and the growth ratios
    G_f(n) = sum_{m<=f((n+1)^2)} g / sum_{m<=f(n^2)} g for n = 1..n_max."""
    if g.family == "unit":
        value, divergent = None, True
    elif g.family == "harmonic":
        value, divergent = math.pi**2 / 6, False
    elif g.family == "power":
        import mpmath

        value, divergent = float(mpmath.zeta(1.5 + g.gamma)), False
    else:
        value = float(sum(Fraction(v, m) for m, v in enumerate(g.table, start=1)))
        divergent = False
    f = TruncationFn(delta)
    traj = []
    for n in range(1, n_max + 1):
        hi = float(g.sum_to(f((n + 1) ** 2), start=1))
        lo = float(g.sum_to(f(n ** 2), start=1))
        traj.append(hi / lo)
    return HypothesisReport(value, divergent, tuple(traj))
