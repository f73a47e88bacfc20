import math

import numpy as np
import pytest

from dynsel.algorithms import Pomc, brute_force_front
from dynsel.analysis import (ErrorSeries, bonferroni_posthoc,
                             brute_force_baseline, check_phi_approx,
                             curvature, format_marks, kruskal_wallis,
                             offline_errors, partial_offline_error,
                             submodularity_ratio)
from dynsel.core import substream
from dynsel.dynamics import BudgetSchedule, run_dynamic
from dynsel.problems import (CardinalityCost, CoverageInstance,
                             LinearObjective, gen_random_digraph)


# ---------------------------------------------------------------------------
# offline errors


class TestPartialOfflineError:
    def test_all_zero(self):
        assert partial_offline_error([0.0, 0.0, 0.0], 1, 3) == 0.0

    def test_full_interval_mean(self):
        assert partial_offline_error([1.0, 2.0, 3.0, 4.0], 1, 4) == 2.5

    def test_sub_interval_mean(self):
        assert partial_offline_error([1.0, 2.0, 3.0, 4.0], 3, 4) == 3.5

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            partial_offline_error([1.0], 1, 2)
        with pytest.raises(ValueError):
            partial_offline_error([1.0, 2.0], 2, 1)

    def test_full_range_is_length_weighted_mean_of_parts(self):
        e = list(np.arange(12, dtype=float))
        parts = [(1, 3), (4, 6), (7, 12)]
        weighted = sum(partial_offline_error(e, lo, hi) * (hi - lo + 1)
                       for lo, hi in parts) / 12
        assert partial_offline_error(e, 1, 12) == pytest.approx(weighted)

    def test_accepts_error_series(self):
        s = ErrorSeries(np.array([2.0, 4.0]), baseline_id="bf")
        assert partial_offline_error(s, 1, 2) == 3.0


class TestOfflineErrors:
    def test_brute_force_baseline_non_negative(self):
        f = CoverageInstance(gen_random_digraph(8, 0.25, substream(0, "oe"))).objective
        c = CardinalityCost(8)
        s = BudgetSchedule(2.0, 1.0, 4.0, [1.0, -1.0, 1.0, 1.0], tau=100, r=1.0)
        records = run_dynamic("eamc", f, c, s, seed=1)
        series = offline_errors(records, brute_force_baseline(f, c), "bf")
        assert (series.errors >= 0).all()
        assert len(series) == len(records)


# ---------------------------------------------------------------------------
# Kruskal-Wallis


class TestKruskalWallis:
    def test_identical_groups_degenerate(self):
        h, p = kruskal_wallis([[1.0, 1.0], [1.0, 1.0]])
        assert h == 0.0 and p == 1.0

    def test_hand_computed_h(self):
        h, _p = kruskal_wallis([[1, 2, 3], [4, 5, 6]])
        assert abs(h - 3.857) < 1e-3

    def test_matches_scipy(self):
        from scipy.stats import kruskal

        rng = substream(1, "kw-scipy")
        groups = [rng.normal(size=12), rng.normal(size=15), rng.normal(size=9)]
        h, p = kruskal_wallis(groups)
        ref = kruskal(*groups)
        assert h == pytest.approx(ref.statistic)
        assert p == pytest.approx(ref.pvalue)

    def test_tie_correction_matches_scipy(self):
        from scipy.stats import kruskal

        groups = [[1, 1, 2, 3], [2, 2, 3, 3], [1, 3, 3, 4]]
        h, p = kruskal_wallis(groups)
        ref = kruskal(*groups)
        assert h == pytest.approx(ref.statistic)
        assert p == pytest.approx(ref.pvalue)

    def test_monotone_transform_invariance(self):
        rng = substream(2, "kw-mono")
        groups = [rng.normal(size=10), rng.normal(loc=1.0, size=10)]
        h1, p1 = kruskal_wallis(groups)
        h2, p2 = kruskal_wallis([np.exp(g) for g in groups])
        assert h1 == h2 and p1 == p2

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            kruskal_wallis([[1.0, 2.0]])
        with pytest.raises(ValueError):
            kruskal_wallis([[1.0], []])


class TestBonferroniPosthoc:
    def test_identical_groups_no_marks(self):
        marks = bonferroni_posthoc([[1.0, 1.0, 1.0]] * 3)
        assert not marks.any()

    def test_separated_pair_marked(self):
        rng = substream(3, "ph")
        a = rng.normal(loc=0.0, scale=0.1, size=30)
        b = rng.normal(loc=0.05, scale=0.1, size=30)
        c = rng.normal(loc=10.0, scale=0.1, size=30)
        marks = bonferroni_posthoc([a, b, c])
        assert marks[0, 2] == 1 and marks[2, 0] == -1  # a lower than c
        assert marks[1, 2] == 1 and marks[2, 1] == -1
        assert marks[0, 1] == 0 and marks[1, 0] == 0
        assert (marks == -marks.T).all()

    def test_single_pair_unadjusted(self):
        rng = substream(4, "ph2")
        a = rng.normal(size=25)
        b = rng.normal(loc=2.0, size=25)
        marks = bonferroni_posthoc([a, b])
        assert marks[0, 1] == 1  # correction factor 1: plain Dunn comparison

    def test_format_marks(self):
        marks = np.array([[0, 1, -1], [-1, 0, 0], [1, 0, 0]])
        assert format_marks(marks, 0) == "2(+),3(-)"
        assert format_marks(marks, 1) == "1(-)"


# ---------------------------------------------------------------------------
# theory oracles


class SquaredCardinality:
    n = 3

    def __call__(self, bits):
        return float(bits.sum()) ** 2


class TestSubmodularityRatio:
    def test_coverage_is_submodular(self):
        for seed in range(3):
            f = CoverageInstance(
                gen_random_digraph(8, 0.25, substream(seed, "sr"))).objective
            assert submodularity_ratio(f) == 1.0

    def test_linear_is_one(self):
        assert submodularity_ratio(LinearObjective([1.0, 2.0, 3.0])) == 1.0

    def test_squared_cardinality(self):
        # marginals are 2k+1 for |X| = k; min ratio is 1/5 at |X|=0, |Y|=2
        assert submodularity_ratio(SquaredCardinality()) == pytest.approx(0.2)

    def test_cap(self):
        f = LinearObjective(np.ones(11))
        with pytest.raises(ValueError):
            submodularity_ratio(f)


class TestCurvature:
    def test_linear_is_zero(self):
        assert curvature(LinearObjective([1.0, 2.0, 3.0])) == pytest.approx(0.0)

    def test_g3_coverage(self, g3_objective):
        # removing the leaf node 1 loses nothing: (3-3)/1 = 0, so kappa = 1
        assert curvature(g3_objective) == 1.0

    def test_min_cardinality_one(self):
        class MinCard:
            n = 2

            def __call__(self, bits):
                return float(min(bits.sum(), 1))

        assert curvature(MinCard()) == 1.0

    def test_zero_singleton_skipped_with_warning(self):
        class ZeroFirst:
            n = 2

            def __call__(self, bits):
                return float(bits[1])

        with pytest.warns(UserWarning):
            assert curvature(ZeroFirst()) == 0.0


class TestCheckPhiApprox:
    def test_brute_force_answers_always_pass(self, g3_objective, card3):
        front = brute_force_front(g3_objective, card3, [0.0, 1.0, 2.0, 3.0])
        rep = check_phi_approx(front, g3_objective, card3, 3.0)
        assert rep.all_pass
        assert rep.phi == pytest.approx(0.31606, abs=1e-5)

    def test_g3_pomc_after_1000_steps(self, g3_objective, card3):
        p = Pomc(g3_objective, card3, 2.0, substream(5, "phi"))
        p.run(1000)
        rep = check_phi_approx(p, g3_objective, card3, 2.0)
        assert rep.all_pass
        assert [ch.budget for ch in rep.checks] == [0.0, 1.0, 2.0]

    def test_failing_answers_flagged(self, g3_objective, card3):
        answers = {0.0: 0.0, 1.0: 0.0, 2.0: 0.0}  # worthless answers
        rep = check_phi_approx(answers, g3_objective, card3, 2.0)
        assert not rep.all_pass
        assert rep.checks[0].passed  # opt at b=0 is 0

    def test_precomputed_optima_reused(self, g3_objective, card3):
        front = brute_force_front(g3_objective, card3, [0.0, 1.0, 2.0])
        rep = check_phi_approx(front, g3_objective, card3, 2.0, optima=front)
        assert rep.all_pass

    def test_rejects_zero_increment(self, g3_objective):
        class ZeroCost:
            n = 3
            min_increment = 0.0

            def __call__(self, bits):
                return 0.0

        with pytest.raises(ValueError):
            check_phi_approx({}, g3_objective, ZeroCost(), 1.0)
