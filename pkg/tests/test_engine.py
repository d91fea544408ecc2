import math

import numpy as np
import pytest

from couponcollector import (
    CapacityError,
    DivergenceError,
    IidWithinGroup,
    InputError,
    Population,
    UniformDistinct,
    WeightedDistinct,
    WithoutReplacement,
    first_occurrence_expectation,
    inclusion_exclusion_expectation,
    sampling_expectation,
    single_arrival_expectation,
    uniform_group_expectation,
    uniform_single_expectation,
)
from conftest import random_model

PAPER_COUNTS = (10, 100, 500, 1000)


class TestUniformSingle:
    def test_values(self):
        assert uniform_single_expectation(1) == pytest.approx(1.0, abs=1e-15)
        assert uniform_single_expectation(2) == pytest.approx(3.0, abs=1e-15)
        assert uniform_single_expectation(4) == pytest.approx(25 / 3, rel=1e-15)

    def test_zero_rejected(self):
        with pytest.raises(InputError):
            uniform_single_expectation(0)


class TestUniformGroup:
    def test_hand_values(self):
        # absorbing-chain derivations: 1 + 14/5 and 1 + 5/4
        assert uniform_group_expectation(4, 2) == pytest.approx(3.8, abs=1e-12)
        assert uniform_group_expectation(5, 4) == pytest.approx(2.25, abs=1e-12)
        assert uniform_group_expectation(2, 1) == pytest.approx(3.0, abs=1e-12)

    def test_bad_group_sizes(self):
        with pytest.raises(InputError):
            uniform_group_expectation(4, 4)
        with pytest.raises(InputError):
            uniform_group_expectation(4, 0)

    def test_matches_master_sum_up_to_14(self):
        for m in range(2, 15):
            for g in range(1, m):
                closed = uniform_group_expectation(m, g)
                master = inclusion_exclusion_expectation(UniformDistinct(m, g)).value
                assert master == pytest.approx(closed, rel=1e-9)


class TestMasterSum:
    def test_single_type_needs_one_group(self):
        result = inclusion_exclusion_expectation(IidWithinGroup((1.0,), 3))
        assert result.value == pytest.approx(1.0, abs=1e-15)
        assert result.terms_evaluated == 1

    def test_uniform_4_2(self):
        result = inclusion_exclusion_expectation(UniformDistinct(4, 2))
        assert result.value == pytest.approx(3.8, abs=1e-12)
        assert result.terms_evaluated == 15
        assert result.truncated_at == 2  # q(S) vanishes above |S| = m - g

    def test_unit_population_pairs(self):
        # after any first pair, each draw contains the missing type w.p. 2/3
        result = sampling_expectation((1, 1, 1), 2)
        assert result.value == pytest.approx(2.5, abs=1e-12)

    def test_exhaustive_sample(self):
        # one draw takes the whole population
        assert sampling_expectation((1, 1), 2).value == pytest.approx(1.0, abs=1e-15)

    def test_two_by_two_population(self):
        # 6 equally likely pairs; q({i}) = P(2,2)/P(4,2) = 1/6
        result = sampling_expectation((2, 2), 2)
        assert result.value == pytest.approx(1.4, abs=1e-12)

    def test_paper_headline_value(self):
        result = sampling_expectation(PAPER_COUNTS, 2)
        assert round(result.value, 1) == 81.5

    def test_wrapper_equals_master(self):
        direct = inclusion_exclusion_expectation(
            WithoutReplacement(Population(PAPER_COUNTS), 2)
        )
        wrapped = sampling_expectation(PAPER_COUNTS, 2)
        assert wrapped == direct

    def test_diagnostics(self):
        rng = np.random.default_rng(21)
        for _ in range(25):
            model = random_model(rng, max_m=8)
            result = inclusion_exclusion_expectation(model)
            assert result.value >= 1.0
            assert result.cancellation_ratio >= 1.0
            assert result.terms_evaluated == (1 << model.m) - 1
            assert 0 <= result.truncated_at <= model.m

    def test_capacity_error_names_cap(self):
        model = IidWithinGroup((1 / 11,) * 11, 2)
        with pytest.raises(CapacityError, match="10"):
            inclusion_exclusion_expectation(model, exact_cap=10)
        inclusion_exclusion_expectation(model, exact_cap=11)

    def test_divergence_reports_offending_type(self):
        model = IidWithinGroup((0.5, 0.5, 0.0), 2)
        with pytest.raises(DivergenceError) as err:
            inclusion_exclusion_expectation(model)
        assert err.value.subset_mask == 0b100

    def test_divergence_for_uncovered_weighted_type(self):
        model = WeightedDistinct(3, 2, (1.0, 0.0, 0.0))
        with pytest.raises(DivergenceError):
            inclusion_exclusion_expectation(model)


class TestSpecializations:
    def test_g1_master_equals_direct_single_arrival(self):
        rng = np.random.default_rng(6)
        for _ in range(30):
            m = int(rng.integers(1, 13))
            raw = rng.uniform(0.05, 1.0, size=m)
            p = tuple(raw / raw.sum())
            master = inclusion_exclusion_expectation(IidWithinGroup(p, 1)).value
            direct = single_arrival_expectation(p)
            assert master == pytest.approx(direct, rel=1e-9)

    def test_uniform_p_matches_harmonic_formula(self):
        for m in (1, 2, 5, 9):
            p = (1.0 / m,) * m
            master = inclusion_exclusion_expectation(IidWithinGroup(p, 1)).value
            assert master == pytest.approx(uniform_single_expectation(m), rel=1e-9)

    def test_single_arrival_divergence_and_cap(self):
        with pytest.raises(DivergenceError):
            single_arrival_expectation((1.0, 0.0))
        with pytest.raises(CapacityError):
            single_arrival_expectation((1 / 30,) * 30)


class TestFirstOccurrence:
    def test_paper_companion_value(self):
        model = WithoutReplacement(Population(PAPER_COUNTS), 2)
        assert round(first_occurrence_expectation(model, 0), 1) == 80.7

    def test_always_present_type(self):
        assert first_occurrence_expectation(
            IidWithinGroup((1.0,), 2), 0
        ) == pytest.approx(1.0)

    def test_fair_coin(self):
        model = IidWithinGroup((0.5, 0.5), 1)
        assert first_occurrence_expectation(model, 0) == pytest.approx(2.0)

    def test_bad_index(self):
        with pytest.raises(InputError):
            first_occurrence_expectation(UniformDistinct(3, 2), 3)

    def test_divergent_type(self):
        with pytest.raises(DivergenceError):
            first_occurrence_expectation(IidWithinGroup((1.0, 0.0), 1), 1)

    def test_dominance(self):
        rng = np.random.default_rng(14)
        for _ in range(20):
            model = random_model(rng, max_m=7)
            total = inclusion_exclusion_expectation(model).value
            worst = max(
                first_occurrence_expectation(model, i) for i in range(model.m)
            )
            assert total >= worst - 1e-9

    def test_rare_type_dominates_paper_model(self):
        model = WithoutReplacement(Population(PAPER_COUNTS), 2)
        total = inclusion_exclusion_expectation(model).value
        rare = first_occurrence_expectation(model, 0)
        assert total - rare < 1.0  # 81.5 vs 80.7: near-equality


class TestMonotonicityInG:
    def test_paper_population_g_sweep(self):
        groups = [sampling_expectation(PAPER_COUNTS, g).value for g in range(1, 16)]
        individuals = [g * e for g, e in enumerate(groups, start=1)]
        assert all(a >= b - 1e-9 for a, b in zip(groups, groups[1:]))
        assert all(b >= a - 1e-9 for a, b in zip(individuals, individuals[1:]))

    def test_random_small_populations_group_counts_decrease(self):
        # the group count always weakly decreases in g (a (g+1)-sample
        # contains a g-sample); the per-individual cost g*E does NOT
        # increase in general — it can fall once g is comparable to N,
        # e.g. counts (1, 1, 5, 4) — so only the figure's regime (above)
        # asserts that direction
        rng = np.random.default_rng(8)
        for _ in range(10):
            counts = tuple(int(c) for c in rng.integers(1, 9, size=4))
            values = [
                sampling_expectation(counts, g).value
                for g in range(1, min(8, sum(counts)) + 1)
            ]
            assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))
