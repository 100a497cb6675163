"""Neighbors, indicators, row sums, expected counts, height sets."""

import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from cflab.cf import DyadicStream, PeriodicStream, RationalStream, intermediates
from cflab.farey import (HeightSet, chi, chi_mask, cumulative_expected_count,
                         divergence_functional, enumerate_farey,
                         euler_constant, expected_chi, farey_neighbors,
                         farey_size, farey_table, parse_height_set,
                         row_sum_exact, row_sum_formula, totients_up_to)
from cflab.rationals import FareyFraction


def brute_neighbors(a, q):
    """Oracle: sort all of F_q over [0, 1] and read off the adjacent entries."""
    grid = sorted({Fraction(p, d) for d in range(1, q + 1) for p in range(d + 1)
                   if math.gcd(p, d) == 1})
    i = grid.index(Fraction(a, q))
    return grid[i - 1], grid[i + 1]


def test_neighbors_examples():
    nb = farey_neighbors(FareyFraction(2, 5))
    assert (nb.lower, nb.upper) == (Fraction(1, 3), Fraction(1, 2))
    nb = farey_neighbors(FareyFraction(1, 2))
    assert (nb.lower, nb.upper) == (Fraction(0), Fraction(1))
    nb = farey_neighbors(FareyFraction(1, 5))
    assert (nb.lower, nb.upper) == (Fraction(0), Fraction(1, 4))


def test_neighbors_against_brute_force():
    for q in range(2, 41):
        for a in range(1, q):
            if math.gcd(a, q) != 1:
                continue
            nb = farey_neighbors(FareyFraction(a, q))
            assert (nb.lower, nb.upper) == brute_neighbors(a, q)


def test_neighbors_height_one_rejected():
    with pytest.raises(ValueError):
        farey_neighbors(FareyFraction(0, 1))


def test_unimodularity_and_gap_f100():
    for beta in enumerate_farey(100):
        if beta.den == 1:
            continue
        nb = farey_neighbors(beta)
        lo, hi = nb.lower, nb.upper
        assert beta.num * lo.denominator - lo.numerator * beta.den == 1
        assert hi.numerator * beta.den - beta.num * hi.denominator == 1
        assert lo.denominator + hi.denominator == beta.den
        assert expected_chi(beta) == hi - lo


def test_mediant_ancestry_of_neighbor_triples():
    for beta in enumerate_farey(100):
        if beta.den == 1:
            continue
        nb = farey_neighbors(beta)
        k_num = nb.lower.numerator + nb.upper.numerator
        k_den = nb.lower.denominator + nb.upper.denominator
        assert k_num % beta.num == 0 if beta.num else k_num == 0
        assert k_den % beta.den == 0
        if beta.num:
            assert k_num // beta.num == k_den // beta.den >= 1


def test_chi_examples():
    g = PeriodicStream(0, (), (1,))
    assert chi(FareyFraction(2, 5), g) == 0
    assert chi(FareyFraction(2, 3), g) == 1
    assert chi(FareyFraction(0, 1), g) == 1
    assert chi(FareyFraction(2, 5), RationalStream(1, 3)) == Fraction(1, 2)


def test_enumerate_farey():
    assert [(f.num, f.den) for f in enumerate_farey(3)] == \
        [(0, 1), (1, 3), (1, 2), (2, 3)]
    f5 = list(enumerate_farey(5))
    assert len(f5) == 10 == farey_size(5)
    assert (f5[1].num, f5[1].den) == (1, 5)
    vals = [Fraction(f.num, f.den) for f in f5]
    assert vals == sorted(vals)


def test_totients():
    phi = totients_up_to(12)
    assert list(phi[1:]) == [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4]


def test_expected_chi_examples():
    assert expected_chi(FareyFraction(2, 5)) == Fraction(1, 6)
    assert expected_chi(FareyFraction(1, 2)) == 1
    assert expected_chi(FareyFraction(0, 1)) == 1


def test_row_sums_exact():
    assert row_sum_exact(2) == 1
    assert row_sum_exact(3) == 1
    assert row_sum_exact(5) == Fraction(5, 6)
    # independent enumeration oracle
    for q in range(2, 301):
        total = sum(expected_chi(FareyFraction(a, q))
                    for a in range(1, q) if math.gcd(a, q) == 1)
        assert row_sum_exact(q) == total


def test_row_sum_formula_values():
    c0 = float(mpmath.euler)
    want5 = (8 / 25) * (math.log(5) + math.log(5) / 4 + c0)
    assert abs(row_sum_formula(5) - want5) < 1e-12
    assert abs(row_sum_formula(5) - 0.8285) < 5e-4
    want2 = 0.5 * (2 * math.log(2) + c0)
    assert abs(row_sum_formula(2) - want2) < 1e-12
    assert abs(row_sum_formula(2) - 0.9817) < 5e-4
    want7 = (2 * 6 / 49) * (math.log(7) + math.log(7) / 6 + c0)
    assert abs(row_sum_formula(7) - want7) < 1e-12


def test_euler_constant():
    got = euler_constant()
    with mpmath.workdps(45):
        assert abs(got - mpmath.euler) < mpmath.mpf(10) ** -35


def test_cumulative_expected_count():
    assert cumulative_expected_count(2)[0] == 1
    assert cumulative_expected_count(3)[0] == 2
    assert cumulative_expected_count(4)[0] == Fraction(8, 3)
    exact, asym = cumulative_expected_count(50)
    assert asym == pytest.approx(6 / math.pi ** 2 * math.log(50) ** 2)
    assert exact > 0


def test_farey_table_matches_enumeration():
    table = farey_table(50)
    listed = list(enumerate_farey(50))
    assert len(table) == len(listed)
    for i, beta in enumerate(listed):
        assert (table.num[i], table.den[i]) == (beta.num, beta.den)
        if beta.den == 1:
            continue
        nb = farey_neighbors(beta)
        assert (table.lo_num[i], table.lo_den[i]) == \
            (nb.lower.numerator, nb.lower.denominator)
        assert (table.hi_num[i], table.hi_den[i]) == \
            (nb.upper.numerator, nb.upper.denominator)


def test_chi_mask_matches_scalar_chi():
    table = farey_table(50)
    for seed in range(6):
        x = DyadicStream(seed)
        mask = chi_mask(table, x)
        for i in range(len(table)):
            beta = FareyFraction(int(table.num[i]), int(table.den[i]))
            assert bool(mask[i]) == (chi(beta, x) == 1)


def test_chi_mask_margin_invariance():
    # verdicts are exact for any guard band wider than the float rounding
    # of the endpoint grid, so shrinking it five orders must change nothing
    table = farey_table(80)
    for seed in (11, 12):
        x = DyadicStream(seed)
        ref = chi_mask(table, x, margin=1e-6)
        assert np.array_equal(ref, chi_mask(table, x, margin=1e-13))
        assert np.array_equal(ref, chi_mask(table, x, margin=1e-3))


def test_chi_membership_equivalence_small():
    table = farey_table(40)
    for seed in range(8):
        x = DyadicStream(seed)
        mask = chi_mask(table, x)
        members = {(r.fraction.num, r.fraction.den) for r in intermediates(x, 40)}
        got = {(int(table.num[i]), int(table.den[i]))
               for i in np.nonzero(mask)[0]}
        assert got == members


def test_divergence_functional():
    all_q = HeightSet("all", "all")
    want = math.log(2) / 4 + 2 * math.log(3) / 9
    assert divergence_functional(all_q, 3) == pytest.approx(want)
    assert divergence_functional(all_q, 3) == pytest.approx(0.4174, abs=5e-5)
    only4 = HeightSet("{4}", "set", (4,))
    assert divergence_functional(only4, 10) == pytest.approx(2 * math.log(4) / 16)
    assert divergence_functional(only4, 10) == pytest.approx(0.1733, abs=5e-5)
    empty = HeightSet("empty", "set", ())
    assert divergence_functional(empty, 100) == 0.0


def test_parse_height_set(tmp_path):
    assert 7 in parse_height_set("primes")
    assert 9 not in parse_height_set("primes")
    m = parse_height_set("mod:4,1")
    assert 5 in m and 8 not in m
    p = tmp_path / "qs.txt"
    p.write_text("4\n9\n")
    fs = parse_height_set(f"file:{p}")
    assert 4 in fs and 9 in fs and 5 not in fs
    for bad in ("mod:0,0", "mod:3,7", "nonsense"):
        with pytest.raises(ValueError):
            parse_height_set(bad)


def test_height_set_mask_agrees_with_contains():
    for spec in ("all", "primes", "mod:3,2"):
        hs = parse_height_set(spec)
        mask = hs.mask_up_to(40)
        for q in range(41):
            assert bool(mask[q]) == (q in hs)
