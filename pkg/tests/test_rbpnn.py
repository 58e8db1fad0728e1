import numpy as np
import pytest

from authorid.lexicon import count_groups, tokenize
from authorid.neural import DimensionError
from authorid.rbpnn import (
    ModelError,
    SnapshotIncompatibleError,
    build_model,
    classify,
    classify_features,
    evaluate,
    pattern_layer,
    refine,
    select,
    summation_layer,
    train_output_weights,
)


def two_cluster_fixture():
    """Two well-separated samples, two authors."""
    return [
        (np.array([1.0, 0.0, 0.0, 0.0]), 0),
        (np.array([0.0, 0.0, 0.0, 1.0]), 1),
    ]


class TestBuildModel:
    def test_sizing(self):
        training = [(np.eye(4)[i % 4] * 0.5 + 0.125, i % 3) for i in range(6)]
        model = build_model(training)
        assert model.n_samples == 6
        assert model.n_features == 4
        assert model.n_authors == 3
        assert model.centroids.shape == (6, 4)
        assert model.summation_weights.shape == (6, 3)

    def test_single_author_rejected(self):
        with pytest.raises(ModelError, match="N_G >= 2"):
            build_model([(np.ones(3), 0), (np.zeros(3), 0)])

    def test_author_gap_rejected(self):
        with pytest.raises(ModelError, match="zero samples"):
            build_model([(np.ones(3), 0), (np.zeros(3), 2)])

    def test_inconsistent_lengths_rejected(self):
        with pytest.raises(DimensionError):
            build_model([(np.ones(3), 0), (np.ones(4), 1)])

    def test_random_shapes_sizing_contract(self):
        rng = np.random.default_rng(0)
        for _ in range(10):
            n_f = int(rng.integers(2, 12))
            n_g = int(rng.integers(2, 5))
            per = int(rng.integers(1, 4))
            training = [
                (rng.uniform(size=n_f), a) for a in range(n_g) for _ in range(per)
            ]
            model = build_model(training)
            assert (model.n_features, model.n_samples, model.n_authors) == (n_f, n_g * per, n_g)


class TestPatternLayer:
    def test_unit_response_at_centroid(self, synth):
        model = synth["model"]
        x1 = pattern_layer(model, model.centroids[3])
        assert x1[3] == pytest.approx(1.0)

    def test_far_input_near_zero(self, synth):
        model = synth["model"]
        far = np.full(model.n_features, 1e3)
        assert np.all(pattern_layer(model, far) < 1e-10)

    def test_midpoint_symmetry(self):
        model = build_model(two_cluster_fixture(), beta=1.0)
        mid = (model.centroids[0] + model.centroids[1]) / 2
        x1 = pattern_layer(model, mid)
        assert x1[0] == pytest.approx(x1[1])

    def test_matches_naive_loop_oracle(self):
        rng = np.random.default_rng(1)
        training = [(rng.uniform(size=10), i % 2) for i in range(10)]
        model = build_model(training, beta=0.37)
        v = rng.uniform(size=10)
        x1 = pattern_layer(model, v)
        for j in range(model.n_samples):
            dist = sum((v[k] - model.centroids[j, k]) ** 2 for k in range(10)) ** 0.5
            expected = np.exp(-((dist / model.beta) ** 2) / 2)
            assert abs(x1[j] - expected) < 1e-12


class TestSummationLayer:
    def test_zero_weights(self, synth):
        model = synth["model"]
        from dataclasses import replace

        zeroed = replace(model, summation_weights=np.zeros_like(model.summation_weights))
        x2 = summation_layer(zeroed, np.ones(model.n_samples))
        assert np.all(x2 == 0)

    def test_matches_naive_loop_oracle(self):
        rng = np.random.default_rng(2)
        training = [(rng.uniform(size=10), i % 3) for i in range(10)]
        model = build_model(training)
        x1 = rng.uniform(size=10)
        x2 = summation_layer(model, x1)
        for k in range(model.n_authors):
            expected = sum(model.summation_weights[j, k] * x1[j] for j in range(10))
            assert abs(x2[k] - expected) < 1e-12


class TestSelect:
    def test_argmax_and_margin(self, synth):
        model = synth["model"]
        attr = select(model, np.array([0.2, 0.7, 0.1]))
        assert attr.selected_author == 1
        assert attr.margin == pytest.approx(0.5)

    def test_all_zero_uniform(self, synth):
        model = synth["model"]
        attr = select(model, np.zeros(model.n_authors))
        assert np.allclose(attr.scores, 1.0 / model.n_authors)
        assert attr.selected_author == 0
        assert attr.margin == 0.0

    def test_selector_scale_invariance(self, synth):
        from dataclasses import replace

        model = synth["model"]
        x2 = np.array([0.3, 0.5, 0.2])
        scaled = replace(model, selector_weights=model.selector_weights * 7.3)
        a1 = select(model, x2)
        a2 = select(scaled, x2)
        assert a1.selected_author == a2.selected_author
        assert np.allclose(a1.scores, a2.scores)

    def test_negative_clamped(self, synth):
        model = synth["model"]
        attr = select(model, np.array([-1.0, 0.5, 0.5]))
        assert attr.scores[0] == 0.0
        assert attr.scores.sum() == pytest.approx(1.0)

    def test_scores_always_normalized(self, synth):
        rng = np.random.default_rng(4)
        model = synth["model"]
        for _ in range(50):
            attr = select(model, rng.normal(size=model.n_authors))
            assert np.all(attr.scores >= 0)
            assert attr.scores.sum() == pytest.approx(1.0, abs=1e-9)


class TestTrainOutputWeights:
    def test_separable_fixture_reproduces_targets(self):
        model = build_model(two_cluster_fixture(), beta=0.5)
        from authorid.rbpnn import _pattern_matrix

        phi = _pattern_matrix(model, model.train_features)
        fitted = phi @ model.summation_weights
        targets = np.eye(2)
        assert np.allclose(fitted, targets, atol=1e-4)

    def test_duplicated_sample_ridge_rescue(self):
        training = two_cluster_fixture() + [two_cluster_fixture()[0]]
        model = build_model(training, beta=0.5)
        assert np.all(np.isfinite(model.summation_weights))

    def test_fitted_weights_beat_random_perturbations(self, synth):
        from authorid.rbpnn import _pattern_matrix, _training_loss
        from dataclasses import replace

        model = synth["model"]
        phi = _pattern_matrix(model, model.train_features)
        Y = np.eye(model.n_authors)[model.train_labels]
        base = _training_loss(model, phi, Y)
        rng = np.random.default_rng(7)
        for _ in range(100):
            delta = rng.normal(0, 0.01, size=model.summation_weights.shape)
            perturbed = replace(model, summation_weights=model.summation_weights + delta)
            assert _training_loss(perturbed, phi, Y) >= base


class TestClassify:
    def test_training_text_recovers_author(self, synth):
        author, text = synth["train"][0]
        attr = classify(synth["model"], synth["lexicon"], text)
        assert attr.selected_author == author

    def test_empty_text_uniform(self, synth):
        attr = classify(synth["model"], synth["lexicon"], "")
        assert np.allclose(attr.scores, 1.0 / synth["model"].n_authors)
        assert attr.margin == 0.0

    def test_held_out_text(self, synth):
        author, text = synth["validation"][0]
        attr = classify(synth["model"], synth["lexicon"], text)
        assert attr.selected_author == author
        assert attr.scores[author] > 0.5

    def test_lexicon_mismatch(self, synth):
        from authorid.lexicon import loads_group_db

        other = loads_group_db("a\tx\nb\ty\n")
        with pytest.raises(SnapshotIncompatibleError):
            classify(synth["model"], other, "x y")

    def test_classify_does_not_mutate_model(self, synth):
        model = synth["model"]
        before = {
            "centroids": model.centroids.copy(),
            "W": model.summation_weights.copy(),
            "sel": model.selector_weights.copy(),
        }
        classify(model, synth["lexicon"], synth["validation"][0][1])
        assert np.array_equal(model.centroids, before["centroids"])
        assert np.array_equal(model.summation_weights, before["W"])
        assert np.array_equal(model.selector_weights, before["sel"])


class TestRefine:
    def test_zero_step_identity(self, synth):
        model = synth["model"]
        candidate = refine(model, [], epochs=3, step=0.0)
        assert np.array_equal(candidate.summation_weights, model.summation_weights)
        assert candidate.snapshot_id == model.snapshot_id

    def test_duplicate_sample_loss_non_increasing(self, synth):
        from authorid.rbpnn import _pattern_matrix, _training_loss

        model = synth["model"]
        dup = [(model.train_features[0], int(model.train_labels[0]))]
        losses = []
        current = model
        for _ in range(4):
            current = refine(current, dup if current is model else [], epochs=2, step=0.001)
            phi = _pattern_matrix(current, current.train_features)
            Y = np.eye(current.n_authors)[current.train_labels]
            losses.append(_training_loss(current, phi, Y))
        assert all(l2 <= l1 + 1e-12 for l1, l2 in zip(losses, losses[1:]))

    def test_refine_returns_new_snapshot(self, synth):
        model = synth["model"]
        candidate = refine(model, [], epochs=2, step=0.01)
        # serving model untouched
        assert model.snapshot_id != "" and np.all(np.isfinite(candidate.summation_weights))

    def test_epochs_validation(self, synth):
        with pytest.raises(ModelError):
            refine(synth["model"], [], epochs=0)


class TestEvaluate:
    def test_perfect_classification(self, synth):
        record = evaluate(synth["model"], synth["train_feats"])
        assert record.accuracy == 1.0
        assert np.all(record.boolean_matrix == 0)

    def test_one_miss_in_five(self):
        model = build_model(two_cluster_fixture(), beta=0.5)
        labeled = [(model.train_features[0], 0)] * 4 + [(model.train_features[0], 1)]
        record = evaluate(model, labeled)
        assert record.missed_rate == pytest.approx(0.2)

    def test_error_bounds(self, synth):
        record = evaluate(synth["model"], synth["val_feats"])
        assert np.all(record.error_matrix >= -1.0)
        assert np.all(record.error_matrix <= 1.0)
        assert 0.0 <= record.missed_rate <= 1.0
        assert 0.0 <= record.false_positive_rate <= 1.0
