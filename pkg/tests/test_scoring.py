import numpy as np
import pytest

from models.dual_branch_model import encode, init_model, similarity_matrix
from ndnum.tensor import Tensor
from scoring.baseline_scorer import SCORERS, baseline_scores, get_scorer
from scoring.confidence_scorer import (REJECT, ConfidenceScorer, combine_confidence, decide, score_batch,
                                       score_sample)
from scoring.threshold import calibrate_threshold
from utils.errors import ConfigError, DataError, DimensionError


class TestConfidence:
    def test_branch_scores_are_summed(self):
        table = combine_confidence([[1.0, 2.0]], [2.0], [[3.0, 0.0]], [1.0])
        np.testing.assert_array_equal(table.confidence, [[5.0, 4.0]])
        sample = table.sample(0)
        assert (sample.k_star, sample.c_max) == (0, 5.0)

    def test_single_branch(self):
        table = combine_confidence([[1.0, -2.0, 0.5]], [4.0])
        np.testing.assert_array_equal(table.confidence, [[4.0, -8.0, 2.0]])
        assert table.sim_b is None and table.act_b is None

    def test_tie_resolves_to_lowest_index(self):
        table = combine_confidence([[1.0, 3.0, 3.0]], [1.0])
        assert table.k_star[0] == 1

    def test_score_batch_matches_definition(self, tiny_model, rng):
        x = rng.standard_normal((5, 6))
        table = score_batch(tiny_model, x)
        expected = np.zeros((5, 3))
        for branch in tiny_model.branches:
            z = encode(branch, Tensor(x))
            expected += similarity_matrix(branch, z).data * np.abs(z.data).sum(axis=1, keepdims=True)
        np.testing.assert_allclose(table.confidence, expected)
        np.testing.assert_allclose(table.c_max, expected.max(axis=1))

    def test_single_sample_matches_batch_row(self, tiny_model, rng):
        x = rng.standard_normal((3, 6))
        sample = score_sample(tiny_model, x[1])
        assert sample.c_max == pytest.approx(score_batch(tiny_model, x).c_max[1])

    def test_width_mismatch(self, tiny_model):
        with pytest.raises(DimensionError):
            score_batch(tiny_model, np.ones((2, 5)))

    def test_scorer_interface(self, tiny_model, rng):
        x = rng.standard_normal((4, 6))
        scorer = ConfidenceScorer()
        table = score_batch(tiny_model, x)
        np.testing.assert_array_equal(scorer.score(tiny_model, x), table.c_max)
        np.testing.assert_array_equal(scorer.predict(tiny_model, x), table.k_star)


class TestDecision:
    def test_threshold_is_strict(self):
        sample = combine_confidence([[5.0, 1.0]], [1.0]).sample(0)
        rejected = decide(sample, 5.0)
        assert not rejected.accepted and rejected.predicted_class == REJECT
        accepted = decide(sample, 4.999)
        assert accepted.accepted and accepted.predicted_class == 0

    @pytest.mark.parametrize('target, expected', [(0.0, 1.0), (0.05, 1.0), (0.5, 3.0), (0.8, 4.0)])
    def test_calibration_uses_lower_quantile(self, target, expected):
        assert calibrate_threshold([5.0, 1.0, 3.0, 2.0, 4.0], target) == expected

    def test_calibration_rejects_about_target_share(self, rng):
        scores = rng.standard_normal(1000)
        threshold = calibrate_threshold(scores, 0.05)
        assert np.mean(scores <= threshold) == pytest.approx(0.05, abs=0.002)

    def test_calibration_needs_scores(self):
        with pytest.raises(DataError):
            calibrate_threshold([])

    @pytest.mark.parametrize('target', [-0.1, 1.0, float('nan')])
    def test_calibration_target_range(self, target):
        with pytest.raises(ConfigError):
            calibrate_threshold([1.0, 2.0], target)


class TestBaselines:
    def test_registry_contains_every_rule(self):
        assert set(SCORERS) == {'confidence', 'softmax_confidence', 'pl_similarity'}

    def test_softmax_confidence_is_a_probability(self, tiny_model, rng):
        scores = baseline_scores('softmax_confidence', tiny_model, rng.standard_normal((6, 6)))
        assert np.all((scores >= 1.0 / 3.0 - 1e-12) & (scores <= 1.0))

    def test_similarity_rule_uses_branch_a(self, tiny_model, rng):
        x = rng.standard_normal((4, 6))
        z = encode(tiny_model.branch_a, Tensor(x))
        expected = similarity_matrix(tiny_model.branch_a, z).data.max(axis=1)
        np.testing.assert_allclose(baseline_scores('pl_similarity', tiny_model, x), expected)

    def test_baselines_agree_on_prediction(self, tiny_model, rng):
        x = rng.standard_normal((8, 6))
        np.testing.assert_array_equal(get_scorer('softmax_confidence').predict(tiny_model, x),
                                      get_scorer('pl_similarity').predict(tiny_model, x))

    def test_single_branch_model_supported(self, encoder_config, rng):
        model = init_model(encoder_config, n_classes=3, seed=0, dual=False)
        assert get_scorer('confidence').score(model, rng.standard_normal((2, 6))).shape == (2,)

    def test_unknown_kinds(self, tiny_model):
        with pytest.raises(ConfigError):
            get_scorer('energy')
        with pytest.raises(ConfigError):
            baseline_scores('confidence', tiny_model, np.ones((1, 6)))
