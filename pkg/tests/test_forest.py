import json

import numpy as np
import pytest

from laughkit.errors import ValidationError
from laughkit.features import FeatureRow
from laughkit.forest import (
    CLASSES,
    VERIFY_AUTO_OTHER,
    VERIFY_PASS,
    ForestConfig,
    RandomForestLaughterClassifier,
    evaluate_cv,
    filter_candidates,
    load_model,
    predict,
    predict_proba,
    save_model,
    train,
    verify,
)
from laughkit.records import CandidateLaughter, LaughterSegment

from oracles import forest_predict_json


def blobs(n=200, seed=0, separation=6.0, d=4):
    """Two well-separated Gaussian blobs labeled laughter/other."""
    rng = np.random.default_rng(seed)
    half = n // 2
    a = rng.normal(0.0, 1.0, size=(half, d))
    b = rng.normal(separation, 1.0, size=(n - half, d))
    X = np.vstack([a, b])
    y = ["laughter"] * half + ["other"] * (n - half)
    perm = rng.permutation(n)
    return X[perm], [y[i] for i in perm]


def f1_of(y_true, y_pred, positive="laughter"):
    tp = sum(1 for t, p in zip(y_true, y_pred) if t == positive == p)
    fp = sum(1 for t, p in zip(y_true, y_pred) if t != positive and p == positive)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t == positive and p != positive)
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    return 2 * prec * rec / (prec + rec) if prec + rec else 0.0


class TestVerify:
    def test_gate_boundaries(self):
        assert verify(0.4) == VERIFY_AUTO_OTHER
        assert verify(0.5) == VERIFY_PASS
        assert verify(3.0) == VERIFY_PASS

    def test_accepts_segments(self):
        seg = LaughterSegment("v", 1.0, 1.4, "asr_gap")
        assert verify(seg) == VERIFY_AUTO_OTHER
        cand = CandidateLaughter("v", 1.0, 1.5, 0, 1, 1.0, 1.5)
        assert verify(cand) == VERIFY_PASS

    def test_exhaustive_sweep(self):
        for k in range(0, 200):
            dur = k / 100.0
            expected = VERIFY_PASS if dur >= 0.5 else VERIFY_AUTO_OTHER
            assert verify(dur) == expected, dur


class TestTrain:
    def test_separable_blobs_holdout(self):
        X, y = blobs(n=200, seed=1)
        n_test = 50
        model = train(X[:-n_test], y[:-n_test], ForestConfig(seed=3))
        pred = predict(model, X[-n_test:])
        assert f1_of(y[-n_test:], pred) >= 0.95

    def test_shuffled_labels_are_chance(self):
        X, y = blobs(n=200, seed=2)
        rng = np.random.default_rng(9)
        y_shuffled = [y[i] for i in rng.permutation(len(y))]
        model = train(X[:150], y_shuffled[:150], ForestConfig(seed=3))
        pred = predict(model, X[150:])
        assert 0.25 <= f1_of(y_shuffled[150:], pred) <= 0.75

    def test_single_class_rejected(self):
        X = np.zeros((10, 3))
        with pytest.raises(ValidationError):
            train(X, ["laughter"] * 10)

    def test_unknown_label_rejected(self):
        X = np.zeros((4, 2))
        with pytest.raises(ValidationError):
            train(X, ["laughter", "other", "giggle", "other"])

    def test_depth_respected(self):
        X, y = blobs(n=120, seed=4)
        model = train(X, y, ForestConfig(n_estimators=5, max_depth=2, seed=0))

        def depth(node):
            if "leaf" in node:
                return 0
            return 1 + max(depth(node["left"]), depth(node["right"]))

        assert all(depth(t) <= 2 for t in model.trees)

    def test_feature_names_default(self):
        X, y = blobs(n=40, seed=5, d=3)
        model = train(X, y, ForestConfig(n_estimators=3, seed=0))
        assert model.feature_order == ["f0", "f1", "f2"]


class TestPredict:
    def test_probabilities_sum_to_one(self):
        X, y = blobs(n=100, seed=6)
        model = train(X, y, ForestConfig(n_estimators=10, seed=0))
        proba = predict_proba(model, X)
        assert proba.shape == (100, 2)
        assert np.allclose(proba.sum(axis=1), 1.0)
        assert np.all((proba >= 0) & (proba <= 1))

    def test_training_region_confident(self):
        X, y = blobs(n=200, seed=7)
        model = train(X, y, ForestConfig(seed=1))
        core = np.zeros((1, X.shape[1]))  # deep inside the laughter blob
        assert predict_proba(model, core)[0, 0] > 0.9

    def test_dimension_mismatch(self):
        X, y = blobs(n=40, seed=8)
        model = train(X, y, ForestConfig(n_estimators=3, seed=0))
        with pytest.raises(ValidationError):
            predict(model, np.zeros((2, X.shape[1] + 1)))

    def test_tie_goes_to_other(self):
        # two stumps voting opposite ways with pure leaves = exact 0.5
        model = train(
            np.array([[0.0], [1.0], [0.0], [1.0]]),
            ["laughter", "other", "laughter", "other"],
            ForestConfig(n_estimators=2, max_depth=1, seed=0),
        )
        proba = predict_proba(model, np.array([[0.5]]))[0]
        if proba[0] == 0.5:  # constructed tie
            assert predict(model, np.array([[0.5]])) == ["other"]
        mid = np.array([[0.5]])
        labels = predict(model, mid)
        assert labels[0] in CLASSES

    def test_single_stump_equals_its_output(self):
        X = np.array([[0.0], [0.0], [1.0], [1.0]])
        y = ["laughter", "laughter", "other", "other"]
        model = train(X, y, ForestConfig(n_estimators=1, max_depth=1, seed=5))
        tree = model.trees[0]
        assert "feature" in tree
        lo = predict_proba(model, np.array([[-1.0]]))[0]
        hi = predict_proba(model, np.array([[2.0]]))[0]
        left = np.asarray(tree["left"]["leaf"], dtype=float)
        right = np.asarray(tree["right"]["leaf"], dtype=float)
        assert np.allclose(lo, left / left.sum())
        assert np.allclose(hi, right / right.sum())


class TestDeterminismAndSerialization:
    def test_same_seed_byte_identical(self, tmp_path):
        X, y = blobs(n=150, seed=10)
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        save_model(train(X, y, ForestConfig(seed=42)), p1)
        save_model(train(X, y, ForestConfig(seed=42)), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_different_seed_differs(self, tmp_path):
        X, y = blobs(n=150, seed=10)
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        save_model(train(X, y, ForestConfig(seed=1)), p1)
        save_model(train(X, y, ForestConfig(seed=2)), p2)
        assert p1.read_bytes() != p2.read_bytes()

    def test_roundtrip_preserves_predictions(self, tmp_path):
        X, y = blobs(n=100, seed=11)
        model = train(X, y, ForestConfig(seed=3))
        path = tmp_path / "m.json"
        save_model(model, path)
        back = load_model(path)
        assert predict(back, X) == predict(model, X)
        assert back.config == model.config
        assert back.feature_order == model.feature_order

    def test_predictions_match_json_walk_oracle(self, tmp_path):
        X, y = blobs(n=80, seed=12)
        model = train(X, y, ForestConfig(n_estimators=7, seed=0))
        path = tmp_path / "m.json"
        save_model(model, path)
        blob = json.loads(path.read_text())
        proba = predict_proba(model, X)
        for i in range(0, len(X), 7):
            want = forest_predict_json(blob, list(X[i]))
            assert np.allclose(proba[i], want)

    def test_bad_model_file_rejected(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text("{}")
        with pytest.raises(ValidationError):
            load_model(path)
        path.write_text("not json")
        with pytest.raises(ValidationError):
            load_model(path)


class TestMonotoneTransformInvariance:
    def test_cubed_feature_same_structure_and_predictions(self):
        X, y = blobs(n=120, seed=13, d=3)
        X2 = X.copy()
        X2[:, 1] = X2[:, 1] ** 3  # strictly increasing on reals
        cfg = ForestConfig(n_estimators=10, seed=4)
        m1 = train(X, y, cfg)
        m2 = train(X2, y, cfg)

        def structure(node):
            if "leaf" in node:
                return ("leaf", tuple(node["leaf"]))
            return ("split", node["feature"], structure(node["left"]),
                    structure(node["right"]))

        assert [structure(t) for t in m1.trees] == [
            structure(t) for t in m2.trees
        ]
        assert predict(m1, X) == predict(m2, X2)


class TestEvaluateCv:
    def test_separable_ci_high(self):
        X, y = blobs(n=120, seed=14)
        report = evaluate_cv(X, y, ForestConfig(n_estimators=15, seed=0),
                             iterations=25)
        for cls in CLASSES:
            assert report.per_class[cls]["f1"].lo >= 0.95
        d = report.to_dict()
        assert d["iterations"] == 25
        assert 0 <= d["per_class"]["laughter"]["precision"]["ci_low"] <= 1

    def test_single_iteration_degenerate_ci(self):
        X, y = blobs(n=60, seed=15)
        report = evaluate_cv(X, y, ForestConfig(n_estimators=5, seed=0),
                             iterations=1)
        ci = report.per_class["laughter"]["f1"]
        assert ci.mean == ci.lo == ci.hi

    def test_macro_within_class_range(self):
        X, y = blobs(n=80, seed=16, separation=1.5)  # imperfect classes
        report = evaluate_cv(X, y, ForestConfig(n_estimators=5, seed=0),
                             iterations=10)
        f1s = [report.per_class[cls]["f1"].mean for cls in CLASSES]
        assert min(f1s) - 1e-9 <= report.macro_f1.mean <= max(f1s) + 1e-9

    def test_too_small_class_rejected(self):
        X = np.random.default_rng(0).normal(size=(5, 2))
        y = ["laughter"] + ["other"] * 4
        with pytest.raises(ValidationError):
            evaluate_cv(X, y, iterations=2)

    def test_deterministic(self):
        X, y = blobs(n=60, seed=17)
        cfg = ForestConfig(n_estimators=5, seed=9)
        a = evaluate_cv(X, y, cfg, iterations=5).to_dict()
        b = evaluate_cv(X, y, cfg, iterations=5).to_dict()
        assert a == b


class TestFilterCandidates:
    def build(self):
        X, y = blobs(n=200, seed=18, d=5)
        model = train(X, y, ForestConfig(seed=2))
        cands = [
            CandidateLaughter("v1", 0.0, 2.0, 0, 1, 0.0, 2.0),    # laughterish
            CandidateLaughter("v1", 3.0, 5.0, 2, 3, 3.0, 5.0),    # otherish
            CandidateLaughter("v1", 6.0, 6.3, 4, 5, 6.0, 6.3),    # too short
        ]
        rows = [
            FeatureRow("v1", 0.0, 2.0, np.zeros(5)),        # laughter blob core
            FeatureRow("v1", 3.0, 5.0, np.full(5, 6.0)),    # other blob core
            FeatureRow("v1", 6.0, 6.3, np.zeros(5)),
        ]
        return model, cands, rows

    def test_gate_and_classifier_compose(self):
        model, cands, rows = self.build()
        accepted = filter_candidates(cands, rows, model)
        assert len(accepted) == 1
        seg = accepted[0]
        assert (seg.start_s, seg.end_s) == (0.0, 2.0)
        assert seg.source == "asr_gap"
        assert seg.score is not None and seg.score > 0.5

    def test_short_candidate_never_consults_model(self):
        model, cands, rows = self.build()
        accepted = filter_candidates([cands[2]], [], model)  # no features
        assert accepted == []

    def test_missing_feature_row_rejected(self):
        model, cands, rows = self.build()
        with pytest.raises(ValidationError):
            filter_candidates([cands[0]], [], model)

    def test_empty_candidates(self):
        model, _, _ = self.build()
        assert filter_candidates([], [], model) == []


class TestEstimatorApi:
    def test_fit_predict_score(self):
        X, y = blobs(n=120, seed=19)
        est = RandomForestLaughterClassifier(n_estimators=10, seed=0)
        est.fit(X[:90], y[:90])
        assert est.score(X[90:], np.asarray(y[90:])) >= 0.9
        assert list(est.classes_) == list(CLASSES)
        assert est.n_features_in_ == X.shape[1]

    def test_get_set_params(self):
        est = RandomForestLaughterClassifier(max_depth=5)
        assert est.get_params()["max_depth"] == 5
        est.set_params(n_estimators=7)
        assert est.get_params()["n_estimators"] == 7

    def test_unfitted_predict_rejected(self):
        with pytest.raises(ValidationError):
            RandomForestLaughterClassifier().predict(np.zeros((1, 2)))

    def test_save_and_from_file(self, tmp_path):
        X, y = blobs(n=80, seed=20)
        est = RandomForestLaughterClassifier(n_estimators=5, seed=1)
        est.fit(X, y)
        path = tmp_path / "m.json"
        est.save(path)
        back = RandomForestLaughterClassifier.from_file(path)
        assert np.array_equal(back.predict(X), est.predict(X))
        assert back.get_params()["n_estimators"] == 5
