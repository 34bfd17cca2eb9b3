"""Central L-values, rank classification, sign inference, zero-data ingest."""

import math

import numpy as np
import pytest
from scipy.special import exp1

from twistrank.arith import squarefree_sieve
from twistrank.curve import TwistedCurve, root_number_coprime
from twistrank.errors import (
    AmbiguousSignError,
    InsufficientTableError,
    WrongSignError,
    ZeroDataError,
)
from twistrank.lfun import (
    ZeroData,
    analytic_rank_class,
    infer_root_number,
    l_prime_center,
    l_value_center,
    load_zeros,
    twisted_an,
)

from _oracles import e1_quadrature, is_torsion_point, search_twist_point


class TestCentralValues:
    def test_l_value_11a(self, fixtures, tables):
        # L(E, 1) = 0.25384186... for the conductor-11 fixture
        tw = TwistedCurve(base=fixtures["e11a"].curve, d=1)
        lv = l_value_center(tw, tables["e11a"])
        assert lv.kind == "central"
        assert abs(lv.value - 0.25384186) < 5e-7

    def test_l_prime_37a(self, fixtures, tables):
        # L'(E, 1) = 0.30599977... for the conductor-37 fixture
        tw = TwistedCurve(base=fixtures["e37a"].curve, d=1)
        lv = l_prime_center(tw, tables["e37a"])
        assert lv.kind == "first_derivative"
        assert abs(lv.value - 0.30599977) < 5e-7

    def test_cutoff_doubling_within_tail_bound(self, fixtures, tables):
        tw = TwistedCurve(base=fixtures["e11a"].curve, d=5)
        table = tables["e11a"]
        lv = l_value_center(tw, table, tol=1e-9)
        sqrt_N = math.sqrt(tw.analytic_conductor)
        M2 = 2 * lv.cutoff
        a = twisted_an(tw, table, M2)
        n = np.arange(1, M2 + 1, dtype=np.float64)
        v2 = 2.0 * float(np.sum(a[1:] / n * np.exp(-2.0 * math.pi * n / sqrt_N)))
        assert abs(v2 - lv.value) <= lv.tail_bound
        assert lv.tail_bound <= 1e-9

    def test_wrong_sign_rejected_both_ways(self, fixtures, tables):
        tw37 = TwistedCurve(base=fixtures["e37a"].curve, d=1)   # eps = -1
        with pytest.raises(WrongSignError):
            l_value_center(tw37, tables["e37a"])
        tw11 = TwistedCurve(base=fixtures["e11a"].curve, d=1)   # eps = +1
        with pytest.raises(WrongSignError):
            l_prime_center(tw11, tables["e11a"])

    def test_explicit_eps_overrides_computed_sign(self, fixtures, tables):
        # passing the matching sign explicitly skips recomputation
        tw = TwistedCurve(base=fixtures["e11a"].curve, d=1)
        lv = l_value_center(tw, tables["e11a"], eps=1)
        assert abs(lv.value - 0.25384186) < 5e-7


class TestTwistedAn:
    def test_insufficient_table(self, fixtures, small_tables):
        tw = TwistedCurve(base=fixtures["e11a"].curve, d=1)
        with pytest.raises(InsufficientTableError):
            twisted_an(tw, small_tables["e11a"], 20000)

    def test_trivial_twist_multiplicativity(self, fixtures, tables):
        # a_6 = a_2 a_3 and a_4 = a_2^2 - 2 on the untwisted curve
        tw = TwistedCurve(base=fixtures["e11a"].curve, d=1)
        a = twisted_an(tw, tables["e11a"], 30)
        assert a[1] == 1.0
        assert a[6] == a[2] * a[3]
        assert a[4] == a[2] * a[2] - 2.0   # 2 is a good prime for N = 11
        assert a[12] == a[3] * a[4]

    def test_character_kills_ramified_primes(self, fixtures, tables):
        # twisting by d = 5 zeroes every a_n with 5 | n
        tw = TwistedCurve(base=fixtures["e11a"].curve, d=5)
        a = twisted_an(tw, tables["e11a"], 50)
        assert all(a[n] == 0.0 for n in range(5, 51, 5))

    def test_bad_prime_powers_not_reduced(self, fixtures, tables):
        # at the multiplicative prime 11, a_{11^2} = a_11^2 (no -p correction)
        tw = TwistedCurve(base=fixtures["e11a"].curve, d=1)
        a = twisted_an(tw, tables["e11a"], 130)
        assert a[121] == a[11] * a[11]


class TestRankClass:
    def test_parity_matches_root_number(self, fixtures, tables):
        base = fixtures["e11a"].curve
        table = tables["e11a"]
        mask = squarefree_sieve(15).mask
        for d in range(-15, 16):
            if d == 0 or not mask[abs(d)] or math.gcd(abs(d), 11) != 1:
                continue
            rc = analytic_rank_class(TwistedCurve(base=base, d=d), table)
            eps = root_number_coprime(base, d)
            assert rc.parity == ("even" if eps == 1 else "odd")
            if rc.rank < 2:
                assert rc.rank % 2 == (0 if eps == 1 else 1)

    def test_untwisted_fixture_ranks(self, fixtures, tables):
        rc11 = analytic_rank_class(
            TwistedCurve(base=fixtures["e11a"].curve, d=1), tables["e11a"])
        assert rc11.rank == 0 and not rc11.low_confidence and rc11.margin > 0
        rc37 = analytic_rank_class(
            TwistedCurve(base=fixtures["e37a"].curve, d=1), tables["e37a"])
        assert rc37.rank == 1 and rc37.margin > 0

    def test_point_search_concordance(self, fixtures, tables):
        # rank-0 classifications never coexist with a found non-torsion point
        base = fixtures["e37a"].curve
        table = tables["e37a"]
        mask = squarefree_sieve(20).mask
        checked = 0
        for d in range(-20, 21):
            if d == 0 or d == 1 or not mask[abs(d)] or math.gcd(abs(d), 37) != 1:
                continue
            rc = analytic_rank_class(TwistedCurve(base=base, d=d), table)
            pt = search_twist_point(base.a, base.b, d, height=30)
            if rc.rank == 0 and pt is not None:
                assert is_torsion_point(base.a, base.b, d, pt)
            if pt is not None and not is_torsion_point(base.a, base.b, d, pt):
                assert rc.rank >= 1
            checked += 1
        assert checked >= 20


class TestInferRootNumber:
    def test_matches_formula_on_panel(self, fixtures, tables):
        base = fixtures["e11a"].curve
        table = tables["e11a"]
        mask = squarefree_sieve(25).mask
        n = 0
        for d in range(-25, 26):
            if d == 0 or not mask[abs(d)] or math.gcd(abs(d), 11) != 1:
                continue
            tw = TwistedCurve(base=base, d=d)
            assert infer_root_number(tw, table) == root_number_coprime(base, d)
            n += 1
        assert n >= 25

    def test_trivial_twist(self, fixtures, tables):
        tw = TwistedCurve(base=fixtures["e37a"].curve, d=1)
        assert infer_root_number(tw, tables["e37a"]) == -1

    def test_coarse_tolerance_is_ambiguous(self, fixtures, tables):
        # with tol = 1, both sign hypotheses look flat and no guess is made
        tw = TwistedCurve(base=fixtures["e11a"].curve, d=1)
        with pytest.raises(AmbiguousSignError):
            infer_root_number(tw, tables["e11a"], tol=1.0)


def _write(tmp_path, text):
    p = tmp_path / "zeros.csv"
    p.write_text(text)
    return p


class TestLoadZeros:
    def test_round_trip(self, tmp_path):
        p = _write(tmp_path, "d,gamma,multiplicity\n"
                             "5,1.25,1\n5,2.5,2\n-3,0.7,1\n")
        zd = load_zeros(p)
        assert len(zd) == 2
        assert np.allclose(zd.gammas(5), [1.25, 2.5])
        assert zd.twists[5][1].tolist() == [1, 2]
        assert zd.provenance == str(p)

    def test_empty_file(self, tmp_path):
        zd = load_zeros(_write(tmp_path, ""))
        assert len(zd) == 0

    def test_bad_header(self, tmp_path):
        with pytest.raises(ZeroDataError, match="bad header"):
            load_zeros(_write(tmp_path, "d,gamma\n5,1.0\n"))

    def test_unparseable_row_names_line(self, tmp_path):
        p = _write(tmp_path, "d,gamma,multiplicity\n5,1.0,1\n5,two,1\n")
        with pytest.raises(ZeroDataError, match=r":3"):
            load_zeros(p)

    def test_nonpositive_gamma(self, tmp_path):
        with pytest.raises(ZeroDataError, match="gamma"):
            load_zeros(_write(tmp_path, "d,gamma,multiplicity\n5,-1.0,1\n"))

    def test_bad_multiplicity(self, tmp_path):
        with pytest.raises(ZeroDataError, match="multiplicity"):
            load_zeros(_write(tmp_path, "d,gamma,multiplicity\n5,1.0,0\n"))

    def test_descending_ordinates(self, tmp_path):
        p = _write(tmp_path, "d,gamma,multiplicity\n5,2.0,1\n5,1.0,1\n")
        with pytest.raises(ZeroDataError, match="ascending"):
            load_zeros(p)

    def test_ordering_is_per_twist(self, tmp_path):
        # interleaved twists only need ascent within each d
        p = _write(tmp_path, "d,gamma,multiplicity\n"
                             "5,2.0,1\n7,1.0,1\n5,3.0,1\n7,0.5,1\n")
        with pytest.raises(ZeroDataError, match="d=7"):
            load_zeros(p)


class TestE1Kernel:
    @pytest.mark.parametrize("x", [0.5, 1.0, 5.0])
    def test_exp1_against_quadrature(self, x):
        assert abs(exp1(x) - e1_quadrature(x)) < 1e-10
