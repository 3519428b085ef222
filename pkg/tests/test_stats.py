import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from iqpool.errors import (
    FitDegenerate,
    InvalidCodeword,
    InvalidParameter,
    InvalidSampleSize,
    UndefinedCorrelation,
)
from iqpool.stats import (
    codeword_totals,
    encode_codeword,
    fisher_z_statistic,
    logistic_curve,
    logistic_fit,
    pearson,
    significant_difference,
    spearman,
)


class TestPearson:
    def test_perfect_linear(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert pearson(x, [2 * v + 1 for v in x]) == pytest.approx(1.0, abs=1e-14)

    def test_perfect_negative(self):
        x = [1.0, 2.0, 3.0, 4.0]
        assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-14)

    def test_matches_textbook_oracle(self, rng):
        x = rng.normal(size=10).tolist()
        y = rng.normal(size=10).tolist()
        assert pearson(x, y) == pytest.approx(oracles.pearson(x, y), abs=1e-12)

    def test_constant_input_undefined(self):
        with pytest.raises(UndefinedCorrelation):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_too_few_samples(self):
        with pytest.raises(UndefinedCorrelation):
            pearson([1.0, 2.0], [1.0, 2.0])


class TestSpearman:
    def test_monotone_transform_is_one(self):
        x = [0.1, 0.7, 1.4, 2.0, 3.3]
        assert spearman(x, [math.exp(v) for v in x]) == pytest.approx(1.0, abs=1e-14)

    def test_ties_match_rank_oracle(self):
        x = [1.0, 2.0, 2.0, 3.0]
        y = [1.0, 2.0, 3.0, 4.0]
        assert spearman(x, y) == pytest.approx(oracles.spearman(x, y), abs=1e-14)

    def test_reversed_is_minus_one(self):
        x = [1.0, 2.0, 3.0, 4.0, 5.0]
        assert spearman(x, list(reversed(x))) == pytest.approx(-1.0, abs=1e-14)

    def test_equals_pearson_of_ranks(self, rng):
        x = rng.integers(0, 5, size=30).astype(float).tolist()
        y = rng.normal(size=30).tolist()
        assert spearman(x, y) == pytest.approx(
            pearson(oracles.average_ranks(x), oracles.average_ranks(y)), abs=1e-14
        )

    @given(
        st.lists(st.floats(min_value=-50, max_value=50), min_size=4, max_size=30, unique=True),
        st.floats(min_value=0.1, max_value=3.0),
    )
    @settings(max_examples=40, deadline=None)
    def test_invariant_under_increasing_transform(self, xs, scale):
        ys = [math.tanh(v / 50.0) * scale for v in xs]  # strictly increasing in v
        base = spearman(xs, ys)
        transformed = spearman(xs, [v**3 * scale + v for v in ys])
        assert transformed == pytest.approx(base, abs=1e-12)


class TestLogisticFit:
    def test_linear_data_not_worse_than_identity(self, rng):
        scores = np.linspace(10.0, 90.0, 25) + rng.normal(0, 2.0, 25)
        mos = scores.copy()
        fit = logistic_fit(scores, mos)
        mapped = fit.apply(scores)
        assert pearson(mapped, mos) >= pearson(scores, mos) - 1e-6

    def test_recovers_synthetic_parameters(self):
        beta = np.array([85.0, 15.0, 0.45, 0.12])
        q = np.linspace(0.0, 1.0, 40)
        target = logistic_curve(beta, q)
        fit = logistic_fit(q, target)
        rmse = float(np.sqrt(np.mean((fit.apply(q) - target) ** 2)))
        assert rmse <= 1e-4

    def test_recovers_decreasing_curve(self):
        beta = np.array([10.0, 90.0, 0.5, 0.15])  # b1 < b2: decreasing mapping
        q = np.linspace(0.0, 1.0, 30)
        target = logistic_curve(beta, q)
        fit = logistic_fit(q, target)
        assert float(np.sqrt(np.mean((fit.apply(q) - target) ** 2))) <= 1e-4

    def test_constant_scores_degenerate(self):
        with pytest.raises(FitDegenerate):
            logistic_fit([2.0] * 8, list(range(8)))

    def test_mapping_is_monotonic(self, rng):
        scores = rng.uniform(0, 1, 30)
        mos = 80.0 / (1.0 + np.exp(-(scores - 0.5) / 0.1)) + rng.normal(0, 3.0, 30)
        fit = logistic_fit(scores, mos)
        grid = np.linspace(scores.min(), scores.max(), 500)
        diffs = np.diff(fit.apply(grid))
        assert np.all(diffs >= -1e-12) or np.all(diffs <= 1e-12)


class TestSignificance:
    def test_equal_correlations_never_differ(self):
        assert significant_difference(0.8, 50, 0.8, 50) is False

    def test_clearly_different(self):
        # Closed form: |atanh(.95) - atanh(.70)| / sqrt(1/97 + 1/97) ~ 6.7
        stat = fisher_z_statistic(0.95, 100, 0.70, 100)
        expected = abs(math.atanh(0.95) - math.atanh(0.70)) / math.sqrt(1 / 97 + 1 / 97)
        assert stat == pytest.approx(expected, rel=1e-15)
        assert stat == pytest.approx(6.7, abs=0.1)
        assert significant_difference(0.95, 100, 0.70, 100, alpha=0.05) is True

    def test_tiny_gap_not_significant(self):
        stat = fisher_z_statistic(0.80, 30, 0.78, 30)
        expected = abs(math.atanh(0.80) - math.atanh(0.78)) / math.sqrt(1 / 27 + 1 / 27)
        assert stat == pytest.approx(expected, rel=1e-15)
        assert significant_difference(0.80, 30, 0.78, 30, alpha=0.05) is False

    def test_symmetry(self):
        assert significant_difference(0.9, 40, 0.5, 80) == significant_difference(0.5, 80, 0.9, 40)

    def test_perfect_correlation_clamped_finite(self):
        stat = fisher_z_statistic(1.0, 10, -1.0, 10)
        assert math.isfinite(stat)
        assert significant_difference(1.0, 10, 0.2, 10) is True

    def test_small_samples_rejected(self):
        with pytest.raises(InvalidSampleSize):
            significant_difference(0.5, 3, 0.6, 30)

    def test_bad_alpha(self):
        with pytest.raises(InvalidParameter):
            significant_difference(0.5, 30, 0.6, 30, alpha=0.0)


class TestCodewords:
    def test_all_false(self):
        assert encode_codeword([False] * 9).digits == "000000000"

    def test_all_true(self):
        assert encode_codeword([True] * 9).digits == "111111111"

    def test_positional(self):
        flags = [False] * 9
        flags[1] = True  # first database slot, second attribute
        assert encode_codeword(flags).digits == "010000000"

    def test_wrong_arity(self):
        with pytest.raises(InvalidCodeword):
            encode_codeword([True] * 8)

    def test_totals_counting(self):
        cws = [encode_codeword([c == "1" for c in "100000000"]),
               encode_codeword([c == "1" for c in "100000001"])]
        cols, dbs = codeword_totals(cws)
        assert cols == [2, 0, 0, 0, 0, 0, 0, 0, 1]
        assert dbs == [2, 0, 1]

    def test_all_insignificant_sums_zero(self):
        cws = [encode_codeword([False] * 9) for _ in range(5)]
        cols, dbs = codeword_totals(cws)
        assert cols == [0] * 9
        assert dbs == [0] * 3

    def test_empty_matrix_rejected(self):
        with pytest.raises(InvalidCodeword):
            codeword_totals([])
