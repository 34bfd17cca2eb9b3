"""Family statistics: sign sums, rank tallies, character sums, omega moments,
and zero-ordinate (T-statistic) diagnostics."""

import math

import numpy as np
import pytest

from twistrank.arith import WeightSpec, kronecker, squarefree_sieve
from twistrank.curve import root_number_coprime, root_number_squarefreeN
from twistrank.errors import CoverageError, UndefinedInputError
from twistrank.lfun import RankClass, ZeroData
from twistrank.stats import (
    multiplicity_census,
    omega_moments,
    omega_rank_bound,
    rank_distribution,
    root_number_sum,
    squarefree_char_sum,
    t_statistic,
    t_variance_scaling,
)

from _oracles import omega_slow

GAUSS = WeightSpec.gaussian(1.0)


def _zero_data(twists):
    return ZeroData(twists={
        d: (np.asarray(g, dtype=np.float64), np.asarray(m, dtype=np.int64))
        for d, (g, m) in twists.items()
    })


def _full_coverage(D, entries=None):
    mask = squarefree_sieve(D).mask
    tw = {}
    for d in range(-D, D + 1):
        if d != 0 and mask[abs(d)]:
            tw[d] = ([], [])
    if entries:
        tw.update(entries)
    return _zero_data(tw)


class TestRootNumberSum:
    def test_matches_pointwise_formula(self, fixtures):
        curve = fixtures["e11a"].curve
        grid = [5, 10, 20, 30, 50]
        fit = root_number_sum(curve, grid)
        mask = squarefree_sieve(max(grid)).mask
        for D, got in zip(grid, fit.values):
            want = sum(root_number_coprime(curve, d)
                       for d in range(-D, D + 1)
                       if d != 0 and mask[abs(d)] and abs(d) % 11 != 0)
            assert got == want

    def test_all_squarefree_mode(self, fixtures):
        curve = fixtures["e11a"].curve
        grid = [50, 100, 200, 400]
        fit = root_number_sum(curve, grid, mode="all_squarefree")
        mask = squarefree_sieve(max(grid)).mask
        for D, got in zip(grid, fit.values):
            want = sum(root_number_squarefreeN(curve, d)
                       for d in range(-D, D + 1) if d != 0 and mask[abs(d)])
            assert got == want

    def test_steps_are_even(self, fixtures):
        # each new |d| contributes eps(d) + eps(-d), always even
        fit = root_number_sum(fixtures["e11a"].curve, list(range(5, 55, 5)))
        steps = np.diff(fit.values)
        assert np.all(np.mod(steps, 2) == 0)

    def test_square_root_cancellation(self, fixtures):
        fit = root_number_sum(fixtures["e11a"].curve,
                              [100, 316, 1000, 3163, 10000])
        assert fit.beta < 0.7
        assert fit.constant > 0

    def test_antisymmetric_family_is_flat(self, fixtures):
        # for this curve eps(E_d) = -eps(E_-d), so every partial sum is 0
        fit = root_number_sum(fixtures["e37a"].curve, [5, 10, 20, 30])
        assert np.all(fit.values == 0)
        assert fit.beta == 0.0 and fit.constant == 0.0 and fit.residual == 0.0

    def test_unknown_mode(self, fixtures):
        with pytest.raises(ValueError, match="mode"):
            root_number_sum(fixtures["e11a"].curve, [10, 20], mode="weird")


class TestRankDistribution:
    def test_tally(self):
        classes = [RankClass(0, "even", 0.5), RankClass(0, "even", 0.2),
                   RankClass(1, "odd", 0.3),
                   RankClass(2, "even", -0.1, low_confidence=True)]
        tally = rank_distribution(classes)
        assert tally.counts == {0: 2, 1: 1, 2: 1}
        assert tally.total == 4
        assert tally.low_confidence == 1
        assert sum(tally.proportions.values()) == pytest.approx(1.0)
        assert tally.proportions[0] == 0.5

    def test_empty_family(self):
        with pytest.raises(UndefinedInputError):
            rank_distribution([])


class TestCharSum:
    # weight supported inside |x| <= 1 so the sharp cutoff loses no mass
    TRI = WeightSpec.triangular()

    def test_trivial_character_main_term(self, fixtures):
        # n = 1: every term is w(d/D), and the main term tracks the count
        curve = fixtures["e11a"].curve
        rep = squarefree_char_sum(curve, 1, 3000, self.TRI)
        mask = squarefree_sieve(3000).mask
        want = sum(2.0 * self.TRI(m / 3000)
                   for m in range(1, 3001) if mask[m] and m % 11 != 0)
        assert rep.direct == pytest.approx(want, rel=1e-12)
        assert abs(rep.residual) < 0.01 * rep.main_term

    def test_nonsquare_has_zero_main_term(self, fixtures):
        curve = fixtures["e11a"].curve
        rep = squarefree_char_sum(curve, 13, 2000, self.TRI)
        assert rep.main_term == 0.0
        # square-root cancellation: tiny compared to the n = 1 mass
        assert abs(rep.direct) < 0.05 * squarefree_char_sum(
            curve, 1, 2000, self.TRI).direct

    def test_square_n_main_term_formula(self, fixtures):
        curve = fixtures["e11a"].curve
        n, D = 9, 2000
        rep = squarefree_char_sum(curve, n, D, self.TRI)
        zeta2 = math.pi ** 2 / 6.0
        want = (D / zeta2 * self.TRI.integral()
                / (1.0 + kronecker(11, n) / 11.0) / (1.0 + 1.0 / 3.0))
        assert rep.main_term == pytest.approx(want, rel=1e-12)
        assert abs(rep.residual) < 0.01 * rep.main_term

    def test_growth_fit_attached(self, fixtures):
        curve = fixtures["e11a"].curve
        rep = squarefree_char_sum(curve, 1, 800, self.TRI,
                                  D_grid=[100, 200, 400, 800])
        assert rep.growth is not None
        assert len(rep.growth.values) == 4

    def test_bad_n(self, fixtures):
        with pytest.raises(ValueError):
            squarefree_char_sum(fixtures["e11a"].curve, 0, 100, self.TRI)


class TestOmegaMoments:
    def test_exact_small(self):
        rep = omega_moments(16, 1)
        assert rep.moment == sum(omega_slow(n) for n in range(1, 17))

    def test_exact_against_oracle(self):
        rep = omega_moments(2000, 2)
        assert rep.moment == sum(omega_slow(n) ** 2 for n in range(1, 2001))

    def test_report_consistency(self):
        rep = omega_moments(10**5, 3)
        assert rep.bound == pytest.approx(
            2.0 * 1e5 * math.log(math.log(1e5)) ** 3, rel=1e-12)
        assert rep.ratio == rep.moment / rep.bound
        assert rep.ratio < 1.5

    def test_guards(self):
        with pytest.raises(ValueError):
            omega_moments(10, 1)
        with pytest.raises(ValueError):
            omega_moments(100, 0)


class TestOmegaRankBound:
    def test_values(self):
        assert omega_rank_bound(30, 2) == 18 * 3 + 2
        assert omega_rank_bound(-7, 0) == 18
        assert omega_rank_bound(1, 5) == 5   # omega(1) = 0

    def test_rejects_non_squarefree(self):
        with pytest.raises(UndefinedInputError):
            omega_rank_bound(12, 0)
        with pytest.raises(UndefinedInputError):
            omega_rank_bound(0, 0)


class TestTStatistic:
    def test_single_zero_hand_value(self):
        g = 2.0
        zd = _full_coverage(1, {1: ([g], [1])})
        y = np.array([0.5, 1.0, 3.0])
        ts = t_statistic(zd, 1, GAUSS, y)
        rho = 0.5 + 1j * g
        amp = GAUSS(1.0) / (rho * (rho + 1.0))
        want = 2.0 * np.real(np.exp(1j * y * g) * amp)
        assert np.allclose(ts.values, want, atol=1e-14)
        assert ts.mean == pytest.approx(float(want.mean()))
        assert ts.variance == pytest.approx(float(want.var()))

    def test_modulus_bound(self):
        g, m = 1.7, 3
        zd = _full_coverage(2, {-2: ([g], [m])})
        y = np.arange(0.0, 20.0, 0.25) + 0.1
        ts = t_statistic(zd, 2, GAUSS, y)
        rho = 0.5 + 1j * g
        bound = 2.0 * GAUSS(1.0) * m / abs(rho * (rho + 1.0))
        assert np.all(np.abs(ts.values) <= bound + 1e-14)

    def test_values_are_real_and_additive(self):
        zd1 = _full_coverage(2, {1: ([1.0], [1])})
        zd2 = _full_coverage(2, {2: ([2.5], [2])})
        zd12 = _full_coverage(2, {1: ([1.0], [1]), 2: ([2.5], [2])})
        y = np.linspace(0.1, 5.0, 40)
        v1 = t_statistic(zd1, 2, GAUSS, y).values
        v2 = t_statistic(zd2, 2, GAUSS, y).values
        v12 = t_statistic(zd12, 2, GAUSS, y).values
        assert v1.dtype == np.float64
        assert np.allclose(v1 + v2, v12, atol=1e-14)

    def test_missing_twist_raises(self):
        zd = _zero_data({1: ([1.0], [1])})   # no entry for d = -1
        with pytest.raises(CoverageError, match="-1"):
            t_statistic(zd, 1, GAUSS, np.array([1.0]))

    def test_bad_y_grid(self):
        zd = _full_coverage(1)
        with pytest.raises(ValueError, match="increasing"):
            t_statistic(zd, 1, GAUSS, np.array([2.0, 1.0]))

    def test_empty_ordinates_give_zero(self):
        zd = _full_coverage(3)
        ts = t_statistic(zd, 3, GAUSS, np.array([1.0, 2.0]))
        assert np.all(ts.values == 0.0)
        assert ts.mean == 0.0 and ts.variance == 0.0


class _DoubledGaussian(WeightSpec):
    def __call__(self, x):
        return 2.0 * super().__call__(x)


class TestVarianceScaling:
    def _panel(self, Dmax, seed=3):
        rng = np.random.default_rng(seed)
        mask = squarefree_sieve(Dmax).mask
        tw = {}
        for d in range(-Dmax, Dmax + 1):
            if d == 0 or not mask[abs(d)]:
                continue
            k = int(rng.integers(1, 4))
            g = np.sort(rng.uniform(0.5, 15.0, size=k))
            tw[d] = (g, np.ones(k, dtype=int))
        return _zero_data(tw)

    def test_report_consistency(self):
        zd = self._panel(60)
        y = np.arange(0.1, 30.0, 0.2)
        rep = t_variance_scaling(zd, [20, 30, 40, 60], GAUSS, y)
        x = np.array([D * math.log(D) for D in rep.D_grid])
        v = np.array(rep.variances)
        assert rep.constant == pytest.approx(float(v @ x / (x @ x)), rel=1e-12)
        assert rep.constant > 0
        assert all(val > 0 for val in rep.variances)

    def test_weight_doubling_quadruples_variance(self):
        zd = self._panel(40)
        y = np.arange(0.1, 20.0, 0.2)
        v1 = t_statistic(zd, 40, WeightSpec.gaussian(1.0), y).variance
        v2 = t_statistic(zd, 40, _DoubledGaussian("gaussian", 1.0), y).variance
        assert v2 == pytest.approx(4.0 * v1, rel=1e-10)


class TestMultiplicityCensus:
    def test_all_distinct(self):
        zd = _zero_data({1: ([1.0, 2.0], [1, 1]), -1: ([3.0], [1])})
        c = multiplicity_census(zd)
        assert c.max_multiplicity == 1
        assert c.clusters == ()

    def test_planted_coincidence(self):
        zd = _zero_data({1: ([1.0], [1]), 5: ([1.0 + 1e-9], [1]),
                         -3: ([4.0], [1])})
        c = multiplicity_census(zd, tol=1e-6)
        assert c.max_multiplicity == 2
        assert len(c.clusters) == 1
        gamma, mult, twists = c.clusters[0]
        assert mult == 2 and twists == (1, 5)
        assert gamma == pytest.approx(1.0)

    def test_stored_multiplicity_counts(self):
        zd = _zero_data({7: ([2.5], [3])})
        c = multiplicity_census(zd)
        assert c.max_multiplicity == 3
        assert c.clusters[0][1] == 3

    def test_tol_monotonicity(self):
        zd = _zero_data({1: ([1.0], [1]), 2: ([1.001], [1])})
        assert multiplicity_census(zd, tol=1e-6).max_multiplicity == 1
        assert multiplicity_census(zd, tol=1e-2).max_multiplicity == 2

    def test_empty(self):
        c = multiplicity_census(_zero_data({}))
        assert c.max_multiplicity == 0 and c.clusters == ()
