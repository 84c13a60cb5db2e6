import numpy as np
import pytest

from sparq_bench.errors import DegenerateDistributionError, InvalidParameterError, ShapeMismatchError
from sparq_bench.harness.metrics import (
    fisher_kurtosis,
    outlier_mass_ratio,
    relative_error,
    select_components,
    selection_agreement,
    topk_agreement,
    topk_mass,
)
from sparq_bench.models.sweep import ComponentStrategy


class TestTopKAgreement:
    def test_identical_rankings(self):
        scores = np.array([0.1, 0.5, 0.2, 0.9])
        assert topk_agreement(scores, scores, 2) == 1.0

    def test_partial_overlap(self):
        true = np.array([0.4, 0.3, 0.2, 0.1])
        approx = np.array([0.4, 0.1, 0.3, 0.2])
        assert topk_agreement(true, approx, 2) == 0.5

    def test_disjoint(self):
        assert topk_agreement(np.array([1.0, 2.0, 3.0, 4.0]), np.array([4.0, 3.0, 2.0, 1.0]), 2) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            topk_agreement(np.ones(3), np.ones(4), 1)

    @pytest.mark.parametrize("k", [0, 5])
    def test_k_out_of_range(self, k):
        with pytest.raises(InvalidParameterError):
            topk_agreement(np.ones(4), np.ones(4), k)

    def test_selection_agreement(self):
        true = np.array([0.4, 0.3, 0.2, 0.1])
        assert selection_agreement(true, np.array([0, 3])) == 0.5
        assert selection_agreement(true, np.array([1, 0])) == 1.0

    def test_empty_selection(self):
        with pytest.raises(InvalidParameterError):
            selection_agreement(np.ones(4), np.array([], dtype=np.int64))


class TestKurtosis:
    def test_gaussian(self, rng):
        assert abs(fisher_kurtosis(rng.standard_normal(1_000_000))) < 0.05

    def test_two_point(self):
        assert fisher_kurtosis(np.array([-1.0, 1.0, -1.0, 1.0])) == -2.0

    def test_laplace(self, rng):
        assert abs(fisher_kurtosis(rng.laplace(size=4_000_000)) - 3.0) < 0.1

    def test_constant_input(self):
        with pytest.raises(DegenerateDistributionError, match="degenerate-distribution"):
            fisher_kurtosis(np.full(10, 2.5))

    def test_too_few_samples(self):
        with pytest.raises(InvalidParameterError):
            fisher_kurtosis(np.array([1.0, 2.0, 3.0]))

    def test_outlier_mass(self, rng):
        assert abs(outlier_mass_ratio(rng.standard_normal(1_000_000)) - 1.0) < 0.1
        assert outlier_mass_ratio(rng.standard_t(3, size=1_000_000)) > 1.5

    def test_outlier_mass_constant_input(self):
        with pytest.raises(DegenerateDistributionError):
            outlier_mass_ratio(np.zeros(8))


class TestScoreHelpers:
    def test_topk_mass(self):
        assert topk_mass(np.array([0.1, 0.6, 0.3]), 2) == pytest.approx(0.9, abs=1e-15)
        assert topk_mass(np.array([0.25, 0.5]), 5) == 0.75

    def test_relative_error(self):
        assert relative_error(np.array([3.0, 4.0]), np.array([3.0, 4.0])) == 0.0
        assert relative_error(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 1.0

    def test_relative_error_zero_reference(self):
        assert relative_error(np.array([3.0, 4.0]), np.zeros(2)) == 5.0


class TestSelectComponents:
    def test_top_magnitude(self):
        np.testing.assert_array_equal(select_components(np.array([0.1, -3.0, 2.0, 0.5]), 2), [1, 2])

    def test_group_uses_summed_magnitude(self):
        queries = np.array([[3.0, 0.0, 1.0], [-3.0, 0.0, 2.5]])
        np.testing.assert_array_equal(select_components(queries, 1), [0])

    def test_first(self):
        np.testing.assert_array_equal(select_components(np.ones(6), 3, ComponentStrategy.FIRST), [0, 1, 2])

    def test_random_is_sorted_and_distinct(self, rng):
        chosen = select_components(np.ones(16), 5, ComponentStrategy.RANDOM, rng)
        assert chosen.shape == (5,)
        assert np.all(np.diff(chosen) > 0)

    def test_random_needs_generator(self):
        with pytest.raises(InvalidParameterError):
            select_components(np.ones(4), 2, ComponentStrategy.RANDOM)

    def test_rank_clamped(self):
        assert select_components(np.ones(4), 10).shape == (4,)
