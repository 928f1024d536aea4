"""Lower-bound tests; oracles are exact rationals and hand enumeration."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from obsvalue.lower import (bayes_risk_curve, cube_lower, mixedpbin_mass,
                            richness_lower_bound, simulate_mixture_risk,
                            simulate_multitest_risk)
from obsvalue.pbin import pbin_survival

EXACT = 1e-12


def rational_risk(r: Fraction, n: int) -> Fraction:
    """Exact Bayes risk oracle: (1/2) sum_k min of the two Binomial pmfs."""
    a = 1 / (2 * r)
    pmf0 = [math.comb(n, k) * a**k * (1 - a)**(n - k) for k in range(n + 1)]
    return Fraction(1, 2) * sum(min(p, q) for p, q in zip(pmf0, pmf0[::-1]))


def enum_mixed_survival(count_law, risks, l):
    """Oracle for E[P(PBin(r(N_1), ..., r(N_m)) >= l)] over an explicit
    count law {counts: prob}."""
    total = 0.0
    for counts, w in count_law.items():
        params = [risks[c] for c in counts]
        surv = 0.0
        for bits in itertools.product((0, 1), repeat=len(params)):
            if sum(bits) >= l:
                term = 1.0
                for b, p in zip(bits, params):
                    term *= p if b else 1.0 - p
                surv += term
        total += w * surv
    return total


class TestBayesRiskCurve:
    def test_r2_spot_values(self):
        curve = bayes_risk_curve(2.0, 3)
        assert curve.values[0] == 0.5
        assert abs(curve.values[1] - 0.25) < EXACT
        assert abs(curve.values[2] - 0.25) < EXACT
        assert abs(curve.values[3] - 0.15625) < EXACT

    def test_matches_rational_oracle(self):
        for r in (Fraction(3, 2), Fraction(2), Fraction(4)):
            curve = bayes_risk_curve(float(r), 12)
            for n in range(13):
                assert abs(curve.values[n] - float(rational_risk(r, n))) < EXACT

    def test_one_observation_risk(self):
        rng = np.random.default_rng(3)
        for _ in range(25):
            r = float(rng.uniform(1.001, 50.0))
            curve = bayes_risk_curve(r, 1)
            assert abs(curve.values[1] - 1.0 / (2.0 * r)) < EXACT

    def test_first_drop_is_half_alpha(self):
        for r in (1.5, 2.0, 4.0, 11.0):
            v = bayes_risk_curve(r, 1).values
            assert abs((v[0] - v[1]) - (1.0 - 1.0 / r) / 2.0) < EXACT

    def test_nonincreasing_up_to_256(self):
        for r in (1.5, 2.0, 4.0):
            values = bayes_risk_curve(r, 256).values
            assert np.all(np.diff(values) <= 0.0)

    def test_rejects_r_at_most_one(self):
        with pytest.raises(ValueError):
            bayes_risk_curve(1.0, 4)


class TestRichnessLowerBound:
    def test_spot_value(self):
        assert abs(richness_lower_bound(0.5, 1.0, 1)
                   - 0.5 / (12.0 * math.sqrt(2.0) * math.sqrt(2.0))) < EXACT
        assert abs(richness_lower_bound(0.5, 1.0, 1) - 0.0208333333) < 1e-9

    def test_scaled_constant_for_r2(self):
        # alpha = 1 - 1/r with unit beta gives (1 - 1/r) / (12 sqrt 2)
        c = richness_lower_bound(0.5, 1.0, 7) * math.sqrt(8.0)
        assert abs(c - 0.029462782549439476) < EXACT

    def test_small_alpha_limit(self):
        assert richness_lower_bound(1e-12, 1.0, 1) < 1e-12

    def test_rejects_nonpositive_parameters(self):
        for alpha, beta in ((0.0, 1.0), (0.5, 0.0), (-0.1, 1.0), (0.5, 2.0)):
            with pytest.raises(ValueError):
                richness_lower_bound(alpha, beta, 1)
        with pytest.raises(ValueError):
            richness_lower_bound(0.5, 1.0, 0)


class TestCubeLower:
    def test_n1_r2_vs_hand_enumeration(self):
        risks = bayes_risk_curve(2.0, 2).values
        law_n = {(1, 0): 0.5, (0, 1): 0.5}
        law_n1 = {(2, 0): 0.25, (1, 1): 0.5, (0, 2): 0.25}
        res = cube_lower(1, 2.0)
        assert res.method == "exact"
        for l in (1, 2):
            want = (enum_mixed_survival(law_n, risks, l)
                    - enum_mixed_survival(law_n1, risks, l))
            assert abs(res.per_l[l - 1] - want) < EXACT
        assert abs(res.delta - 0.09375) < EXACT
        assert res.l_star == 1
        assert abs(res.delta_avg - 0.0625) < EXACT
        assert res.ci_at_star == 0.0

    def test_n2_r2_vs_hand_enumeration(self):
        from obsvalue.pbin import multinomial_enumerate
        risks = bayes_risk_curve(2.0, 3).values
        res = cube_lower(2, 2.0)
        assert res.method == "exact"
        law = {}
        for trials in (2, 3):
            counts, probs = multinomial_enumerate(trials, [0.25] * 4)
            law[trials] = dict(zip(map(tuple, counts.tolist()), probs))
        for l in range(1, 5):
            want = (enum_mixed_survival(law[2], risks, l)
                    - enum_mixed_survival(law[3], risks, l))
            assert abs(res.per_l[l - 1] - want) < EXACT

    def test_deltas_nonnegative(self):
        for n, r in ((1, 1.5), (2, 2.0), (3, 4.0), (8, 2.0)):
            res = cube_lower(n, r, mc_samples=5000, seed=n)
            assert res.per_l.min() >= 0.0
            assert res.delta == res.per_l.max()

    def test_dominates_closed_form(self):
        for r in (1.5, 2.0, 4.0):
            for n in (1, 2, 4, 8):
                res = cube_lower(n, r, mc_samples=20_000, seed=50 + n)
                bound = richness_lower_bound(1.0 - 1.0 / r, 1.0, n)
                assert res.delta >= bound - res.ci_at_star

    def test_spot_bound_comparison(self):
        res = cube_lower(1, 2.0)
        assert res.delta >= richness_lower_bound(0.5, 1.0, 1)

    def test_guard_switches_to_mc(self):
        assert cube_lower(4, 2.0).method == "exact"
        res = cube_lower(8, 2.0, mc_samples=2000, seed=1)
        assert res.method == "mc" and res.samples == 2000
        assert res.ci_at_star > 0.0

    def test_mc_agrees_with_exact(self):
        exact = cube_lower(2, 2.0)
        from obsvalue import lower
        from obsvalue.constants import MC_CHUNK
        from obsvalue.streams import chunk_sizes
        samples = 40_000
        risks = bayes_risk_curve(2.0, 3).values
        cache = {}
        parts = [lower._cube_chunk(2, 4, risks, rows, 99, i, cache)
                 for i, rows in enumerate(chunk_sizes(samples, MC_CHUNK))]
        per_l = np.sum([p[0] for p in parts], axis=0) / samples
        var = np.maximum(
            np.sum([p[1] for p in parts], axis=0) / samples - per_l**2, 0.0)
        ci = 3.0 * np.sqrt(var / samples)
        assert np.all(np.abs(per_l - exact.per_l) <= np.maximum(ci, 1e-12))

    def test_worker_count_does_not_change_result(self):
        one = cube_lower(8, 2.0, mc_samples=20_000, seed=4, workers=1)
        three = cube_lower(8, 2.0, mc_samples=20_000, seed=4, workers=3)
        assert one.per_l.tolist() == three.per_l.tolist()
        assert one.ci.tolist() == three.ci.tolist()

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            cube_lower(0, 2.0)
        with pytest.raises(ValueError):
            cube_lower(1, 1.0)


class TestMixedPbinMass:
    def test_single_cell_constant_half(self):
        res = mixedpbin_mass(1, 1, [1.0], [0.5, 0.5])
        assert abs(res.mass - 0.5) < EXACT
        assert res.mass >= 1.0 / 3.0

    def test_n1_m2_uniform_r2(self):
        table = bayes_risk_curve(2.0, 1).values
        res = mixedpbin_mass(1, 2, [0.5, 0.5], table)
        assert res.method == "exact"
        assert np.abs(res.masses - [0.375, 0.5, 0.125]).max() < EXACT
        assert res.k_star == 1
        assert res.mass >= 1.0 / (3.0 * math.sqrt(2.0))

    def test_constant_one_is_point_mass_at_m(self):
        res = mixedpbin_mass(2, 3, [0.2, 0.3, 0.5], [1.0, 1.0, 1.0])
        assert res.k_star == 3
        assert abs(res.mass - 1.0) < EXACT

    def test_exact_vs_hand_enumeration(self):
        from obsvalue.pbin import multinomial_enumerate
        table = np.array([0.5, 0.3, 0.1])
        counts, probs = multinomial_enumerate(2, [0.6, 0.4])
        want = np.zeros(3)
        for row, w in zip(counts.tolist(), probs):
            p1, p2 = table[row[0]], table[row[1]]
            want += w * np.array([(1 - p1) * (1 - p2),
                                  p1 * (1 - p2) + (1 - p1) * p2, p1 * p2])
        res = mixedpbin_mass(2, 2, [0.6, 0.4], table)
        assert np.abs(res.masses - want).max() < EXACT

    def test_mc_path_with_ci(self):
        table = bayes_risk_curve(2.0, 16).values
        res = mixedpbin_mass(16, 16, np.full(16, 1 / 16), table,
                             mc_samples=10_000, seed=6)
        assert res.method == "mc"
        assert res.mass * 4.0 >= 1.0 / 6.0
        assert res.ci_at_star > 0.0

    def test_rejects_non_monotone_table(self):
        with pytest.raises(ValueError, match="monotone"):
            mixedpbin_mass(2, 2, [0.5, 0.5], [0.2, 0.5, 0.3])
        with pytest.raises(ValueError):
            mixedpbin_mass(2, 2, [0.5, 0.5], [0.2, 0.3])  # wrong length
        with pytest.raises(ValueError):
            mixedpbin_mass(2, 2, [0.5, 0.5], [0.2, 0.3, 1.4])


class TestSimulations:
    def test_multitest_fair_pair(self):
        rng = np.random.default_rng(5)
        est = simulate_multitest_risk([0.5, 0.5], 1, 10**6, rng)
        se = math.sqrt(0.75 * 0.25 / 10**6)
        assert abs(est - 0.75) <= 4.0 * se

    def test_multitest_zero_risks(self):
        rng = np.random.default_rng(6)
        assert simulate_multitest_risk([0.0, 0.0], 1, 10**4, rng) == 0.0

    def test_multitest_two_of_two(self):
        rng = np.random.default_rng(7)
        est = simulate_multitest_risk([0.25, 0.5], 2, 10**6, rng)
        se = math.sqrt(0.125 * 0.875 / 10**6)
        assert abs(est - 0.125) <= 4.0 * se

    def test_multitest_matches_survival_on_random_configs(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            m = int(rng.integers(1, 7))
            risks = rng.random(m)
            l = int(rng.integers(1, m + 1))
            want = pbin_survival(risks, l)
            est = simulate_multitest_risk(risks, l, 10**5, rng)
            se = math.sqrt(max(want * (1 - want), 1e-12) / 10**5)
            assert abs(est - want) <= 4.0 * se

    def test_multitest_rejects_bad_input(self):
        rng = np.random.default_rng(9)
        with pytest.raises(ValueError):
            simulate_multitest_risk([0.5], 1, 9_999, rng)
        with pytest.raises(ValueError):
            simulate_multitest_risk([0.5, 0.5], 3, 10**4, rng)

    def test_mixture_weighted_average(self):
        rng = np.random.default_rng(10)
        est = simulate_mixture_risk([0.1, 0.3], [0.5, 0.5], 10**6, rng)
        se = math.sqrt(0.2 * 0.8 / 10**6)
        assert abs(est - 0.2) <= 4.0 * se

    def test_mixture_single_component(self):
        rng = np.random.default_rng(11)
        est = simulate_mixture_risk([0.37], [1.0], 10**5, rng)
        se = math.sqrt(0.37 * 0.63 / 10**5)
        assert abs(est - 0.37) <= 4.0 * se

    def test_mixture_zero_risks(self):
        rng = np.random.default_rng(12)
        assert simulate_mixture_risk([0.0, 0.0], [0.3, 0.7], 10**4, rng) == 0.0

    def test_mixture_rejects_bad_input(self):
        rng = np.random.default_rng(13)
        with pytest.raises(ValueError):
            simulate_mixture_risk([0.5], [0.5, 0.5], 10**4, rng)
        with pytest.raises(ValueError):
            simulate_mixture_risk([0.5], [1.0], 9_999, rng)
