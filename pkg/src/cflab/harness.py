"""Seeded Monte Carlo driver over uniformly sampled reals.

Samples are endless dyadic bit streams with per-sample seeds derived from a
master seed; every experiment statistic is a deterministic function of
(master_seed, sample index, parameter), so runs are byte-reproducible
independent of thread count.  Output is a flat CSV (optionally mirrored to
JSON) plus deterministic per-(param, stat) aggregate summaries.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .cf import GOLDEN64, M64, DyadicStream, cutoff, intermediates, mix64, quotient
from .farey import HeightSet, chi_mask, farey_table
from .stats import (TruncationFn, WeightFunction, birkhoff_average,
                    classical_stats, double_exceedance, indicator_sum,
                    terminal_quotient, x_nf)

ORACLE_LIMIT = 3000


class InvariantViolation(Exception):
    """An internal cross-check (such as multi-method agreement) failed."""


def sample_stream(master_seed: int, index: int, bits: int = 256) -> DyadicStream:
    """Dyadic stream for sample `index` under `master_seed`.

    The per-sample seed is mix64((master_seed + (index+1) * GOLDEN64) mod 2^64)
    with GOLDEN64 = 0x9E3779B97F4A7C15, the same splitmix64 scramble the
    stream applies to its own block counter.  This derivation is part of the
    reproducibility contract.
    """
    if bits < 64:
        raise ValueError("bits must be >= 64")
    if index < 0:
        raise ValueError("index must be >= 0")
    return DyadicStream(mix64((master_seed + (index + 1) * GOLDEN64) & M64), bits=bits)


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    seed: int
    index: int
    param: int
    stat: str
    value: object


@dataclass
class ExperimentConfig:
    experiment: str
    samples: int
    seed: int
    params: dict = field(default_factory=dict)
    threads: int = 1
    exact: bool = False
    initial_bits: int = 256


# -- per-experiment statistics ------------------------------------------------
#
# Each compute function maps (stream, param, settings) to a fixed list of
# (stat name, value) pairs; the stat set may depend on settings but never on
# the sample, so row counts are exactly samples * |grid| * |stats|.


def _run_levy(stream, n, p):
    cs = classical_stats(stream, n)
    return [("levy_stat", cs.levy_stat), ("pq_max", cs.pq_max), ("pq_sum", cs.pq_sum)]


def _run_gauss_kuzmin(stream, k, p):
    n = p["n"]
    hits = sum(1 for i in range(1, n + 1) if quotient(stream, i) == k)
    return [("freq", Fraction(hits, n))]


def _run_nq(stream, Q, p):
    cut = cutoff(stream, Q)
    return [("N", cut.N), ("a", cut.a)]


def _bump_range(counts: dict, lo: int, hi: int) -> None:
    for m in range(lo, hi + 1):
        counts[m] = counts.get(m, 0) + 1


def mq_count_closed(stream, Q: int) -> dict:
    """Multiset {terminal quotient: multiplicity} implied by the closed form."""
    cut = cutoff(stream, Q)
    counts: dict[int, int] = {}
    if cut.N == 0:
        return counts
    counts[1] = 1
    for n in range(1, cut.N):
        _bump_range(counts, 2, quotient(stream, n) + 1)
    _bump_range(counts, 2, cut.a)
    return counts


def mq_count_intermediates(stream, Q: int) -> dict:
    """The same multiset read off the materialized enumeration."""
    counts: dict[int, int] = {}
    for rec in intermediates(stream, Q):
        m = terminal_quotient(rec.fraction)
        counts[m] = counts.get(m, 0) + 1
    return counts


def mq_count_farey(stream, Q: int) -> dict:
    """The multiset from brute-force class enumeration (dyadic streams)."""
    import numpy as np

    table = farey_table(Q)
    mask = chi_mask(table, stream)
    counts = np.bincount(table.terminal[mask])
    return {int(m): int(counts[m]) for m in np.nonzero(counts)[0]}


def mq_value(counts: dict, g: WeightFunction, exact: bool):
    """Total weight of a terminal-quotient multiset under g.

    Multiset equality between routes implies value equality for every g, so
    agreement is always attested on the integer count tables; the reported
    value is a float by default (exact per-family rationals on request, which
    is only practical when the largest quotient is moderate).
    """
    if exact:
        if not g.is_exact:
            raise ValueError("exact values need an exact weight family")
        return sum((c * g(m) for m, c in sorted(counts.items())), Fraction(0))
    return math.fsum(c * float(g(m)) for m, c in sorted(counts.items()))


def _run_mq(stream, Q, p):
    g = p["weight"]
    counts_closed = mq_count_closed(stream, Q)
    counts_inter = mq_count_intermediates(stream, Q)
    agree = counts_closed == counts_inter
    rows = [
        ("mq_closed", mq_value(counts_closed, g, p["exact"])),
        ("mq_intermediates", mq_value(counts_inter, g, p["exact"])),
    ]
    if p["with_farey"]:
        counts_farey = mq_count_farey(stream, Q)
        agree = agree and counts_farey == counts_closed
        rows.append(("mq_farey", mq_value(counts_farey, g, p["exact"])))
    rows.append(("methods_agree", int(agree)))
    return rows


def _run_count(stream, Q, p):
    cut = cutoff(stream, Q)
    total = 1 + sum(quotient(stream, n) for n in range(1, cut.N)) + cut.a - 1 \
        if cut.N > 0 else 0
    return [("count", total)]


def _run_xnf(stream, n, p):
    val = x_nf(stream, n, p["weight"], TruncationFn(p["delta"]))
    return [("xnf", val if p["exact"] else float(val))]


def _run_variance(stream, m, p):
    return [("fsum", indicator_sum(stream, m, p["n"]))]


def _run_pairdep(stream, k, p):
    n = p["n"]
    return [("a_first", quotient(stream, n)), ("a_second", quotient(stream, n + k))]


def _run_double_exceed(stream, M, p):
    return [("exceed_count", double_exceedance(stream, M, p["delta"]))]


def _run_openproblem(stream, Q, p):
    heights: HeightSet = p["heights"]
    hits = sum(1 for rec in intermediates(stream, Q) if rec.height in heights)
    return [("hits", hits)]


def _run_khinchin(stream, n, p):
    g = p["weight"]
    res = birkhoff_average(stream, g, n)
    return [("birkhoff_avg", res.average if p["exact"] else float(res.average))]


@dataclass(frozen=True)
class Experiment:
    name: str
    param: str  # CLI flag carrying the parameter grid: Q | n | k | m
    default_grid: tuple[int, ...]
    compute: Callable
    defaults: tuple = ()


REGISTRY: dict[str, Experiment] = {e.name: e for e in [
    Experiment("levy", "n", (100,), _run_levy),
    Experiment("gauss_kuzmin", "k", (1, 2, 3), _run_gauss_kuzmin, (("n", 100),)),
    Experiment("nq", "Q", (1000,), _run_nq),
    Experiment("mq", "Q", (100,), _run_mq,
               (("weight", WeightFunction.harmonic()),)),
    Experiment("count_intermediates", "Q", (1000,), _run_count),
    Experiment("xnf", "n", (100,), _run_xnf,
               (("weight", WeightFunction.harmonic()), ("delta", 0.5))),
    Experiment("variance", "m", (2, 5, 10), _run_variance, (("n", 100),)),
    Experiment("pairdep", "k", (5, 10), _run_pairdep, (("n", 1),)),
    Experiment("double_exceed", "m", (100,), _run_double_exceed, (("delta", 0.5),)),
    Experiment("openproblem", "Q", (1000,), _run_openproblem,
               (("heights", HeightSet("all", "all")),)),
    Experiment("khinchin_avg", "n", (100,), _run_khinchin,
               (("weight", WeightFunction.harmonic()),)),
]}


def resolve_params(config: ExperimentConfig) -> tuple[tuple[int, ...], dict]:
    exp = REGISTRY.get(config.experiment)
    if exp is None:
        raise ValueError(f"unknown experiment {config.experiment!r}")
    p = dict(exp.defaults)
    p.update(config.params)
    grid = tuple(p.pop("grid", exp.default_grid))
    if not grid or any(int(v) != v or v < 1 for v in grid):
        raise ValueError("parameter grid must be positive integers")
    p["exact"] = config.exact
    if exp.name == "mq":
        # the oracle route is all-or-nothing per run so the stat set is uniform
        p["with_farey"] = max(grid) <= ORACLE_LIMIT
    return grid, p


def run(config: ExperimentConfig) -> list[ResultRow]:
    """Execute the experiment; rows come back sorted by (param, index, stat)."""
    if config.samples < 1:
        raise ValueError("samples must be >= 1")
    if config.threads < 1:
        raise ValueError("threads must be >= 1")
    grid, p = resolve_params(config)
    exp = REGISTRY[config.experiment]

    def work(i: int) -> list[ResultRow]:
        stream = sample_stream(config.seed, i, config.initial_bits)
        out = []
        for param in grid:
            for stat, val in exp.compute(stream, param, p):
                out.append(ResultRow(config.experiment, config.seed, i, param, stat, val))
        return out

    if config.threads == 1:
        chunks = [work(i) for i in range(config.samples)]
    else:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            chunks = list(pool.map(work, range(config.samples)))
    rows = [r for ch in chunks for r in ch]
    rows.sort(key=lambda r: (r.param, r.index, r.stat))
    return rows


def find_violations(rows: list[ResultRow]) -> list[ResultRow]:
    return [r for r in rows if r.stat == "methods_agree" and r.value != 1]


# -- aggregation ---------------------------------------------------------------


@dataclass(frozen=True)
class Summary:
    param: int
    stat: str
    mean: float
    median: float
    trimmed_mean: float
    stddev: float
    count: int


def _median(sorted_vals: list[float]) -> float:
    n = len(sorted_vals)
    mid = n // 2
    if n % 2:
        return sorted_vals[mid]
    return (sorted_vals[mid - 1] + sorted_vals[mid]) / 2


def aggregate(rows: list[ResultRow]) -> list[Summary]:
    """Deterministic summaries per (param, stat).

    Rows are ordered by sample index before reduction; the trimmed mean drops
    ceil(0.05 * count) values at each end of the sorted sample (falling back
    to the plain mean when that would empty the list).
    """
    groups: dict[tuple, list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.param, r.stat), []).append(r)
    out = []
    for key in sorted(groups):
        rs = sorted(groups[key], key=lambda r: r.index)
        vals = [float(r.value) for r in rs]
        n = len(vals)
        mean = math.fsum(vals) / n
        sv = sorted(vals)
        drop = math.ceil(0.05 * n)
        core = sv[drop:n - drop]
        trimmed = math.fsum(core) / len(core) if core else mean
        var = math.fsum((v - mean) ** 2 for v in vals) / (n - 1) if n > 1 else 0.0
        out.append(Summary(key[0], key[1], mean, _median(sv), trimmed,
                           math.sqrt(var), n))
    return out


def pairdep_tables(rows: list[ResultRow], r_vals=(1, 2), s_vals=(1, 2)) -> dict:
    """{(k, r, s): (joint frequency, product of marginal frequencies)}."""
    by_param: dict[int, dict[int, dict[str, int]]] = {}
    for r in rows:
        by_param.setdefault(r.param, {}).setdefault(r.index, {})[r.stat] = r.value
    out = {}
    for k, per_sample in sorted(by_param.items()):
        pairs = [(d["a_first"], d["a_second"]) for _, d in sorted(per_sample.items())]
        n = len(pairs)
        for rv in r_vals:
            for sv in s_vals:
                joint = sum(1 for a, b in pairs if a == rv and b == sv) / n
                p1 = sum(1 for a, _ in pairs if a == rv) / n
                p2 = sum(1 for _, b in pairs if b == sv) / n
                out[(k, rv, sv)] = (joint, p1 * p2)
    return out


# -- serialization ---------------------------------------------------------------

CSV_HEADER = "experiment,seed,index,param,stat,value"


def format_value(v, exact: bool) -> str:
    """Frozen text form: exact mode writes num/den, otherwise ints verbatim
    and everything else as 12-significant-digit decimals."""
    if exact:
        if isinstance(v, Fraction):
            return f"{v.numerator}/{v.denominator}"
        if isinstance(v, int):
            return f"{v}/1"
        raise ValueError(f"value {v!r} is not exact")
    if isinstance(v, int):
        return str(v)
    return format(float(v), ".12g")


def rows_to_csv(rows: list[ResultRow], exact: bool = False) -> str:
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(f"{r.experiment},{r.seed},{r.index},{r.param},{r.stat},"
                     f"{format_value(r.value, exact)}")
    return "\n".join(lines) + "\n"


def write_csv(rows: list[ResultRow], path: str, exact: bool = False) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rows_to_csv(rows, exact))


def write_json(rows: list[ResultRow], path: str, exact: bool = False) -> None:
    """JSON mirror of the CSV: same rows, same value strings."""
    payload = [
        {"experiment": r.experiment, "seed": r.seed, "index": r.index,
         "param": r.param, "stat": r.stat, "value": format_value(r.value, exact)}
        for r in rows
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, separators=(",", ":"))
        fh.write("\n")
