import math
import tempfile
import unittest
from pathlib import Path

import numpy as np

from walkssl.core.abc import ConfigError, DatasetError, DimensionError, ItemNotFoundError
from walkssl.core.eval import (
    RetrievalIndex,
    SvmModel,
    accuracy,
    average_precision,
    build_index,
    classification_report,
    compare_reports,
    confusion_matrix,
    holdout_split,
    mean_average_precision,
    precision_at_k,
    read_report,
    retrieval_report,
    retrieve,
    svm_grid_search,
    svm_predict,
    svm_predict_many,
    svm_train,
    write_report,
)
from walkssl.core.pipeline import FeatureVector


def make_index(points, labels=None, ids=None):
    ids = ids or [chr(ord("A") + i) for i in range(len(points))]
    labels = labels or ["x"] * len(points)
    return RetrievalIndex(source_ids=ids, labels=labels, features=points)


def brute_force_map(ids, labels, feats, queries):
    aps = []
    for q in queries:
        qi = ids.index(q)
        others = []
        for j in range(len(ids)):
            if j == qi:
                continue
            d = math.sqrt(sum((a - b) ** 2 for a, b in zip(feats[qi], feats[j])))
            others.append((d, ids[j], labels[j] == labels[qi]))
        others.sort()
        n_rel = sum(1 for o in others if o[2])
        if n_rel == 0:
            continue
        hits, total = 0, 0.0
        for k, (_, _, rel) in enumerate(others, start=1):
            if rel:
                hits += 1
                total += hits / k
        aps.append(total / n_rel)
    return sum(aps) / len(aps)


class TestRetrieve(unittest.TestCase):

    def test_hand_distances(self):
        index = make_index([[0, 0], [1, 0], [5, 0]])
        self.assertEqual(retrieve(index, "A", 2), ["B", "C"])

    def test_identical_feature_ranked_first(self):
        index = make_index([[0, 0], [3, 3], [0, 0], [1, 1]])
        self.assertEqual(retrieve(index, "A", 1), ["C"])

    def test_k_clamped(self):
        index = make_index([[0, 0], [1, 0], [5, 0]])
        self.assertEqual(retrieve(index, "C", 10), ["B", "A"])

    def test_ties_by_source_id(self):
        index = make_index([[0, 0], [1, 0], [-1, 0]], ids=["q", "z", "b"])
        self.assertEqual(retrieve(index, "q", 2), ["b", "z"])

    def test_missing_query(self):
        with self.assertRaises(ItemNotFoundError):
            retrieve(make_index([[0, 0], [1, 0]]), "Z", 1)

    def test_translation_invariance(self):
        rng = np.random.default_rng(4)
        pts = rng.integers(-20, 20, size=(12, 3)).astype(float)
        shifted = pts + np.array([100.0, -7.0, 3.0])
        a, b = make_index(pts), make_index(shifted)
        for q in a.source_ids:
            self.assertEqual(retrieve(a, q, 11), retrieve(b, q, 11))

    def test_duplicate_ids_rejected(self):
        with self.assertRaises(DatasetError):
            make_index([[0, 0], [1, 0]], ids=["A", "A"])


class TestAveragePrecision(unittest.TestCase):

    def test_hand_cases(self):
        self.assertEqual(average_precision([1, 1, 0, 0], 2), 1.0)
        self.assertAlmostEqual(average_precision([1, 0, 1, 0], 2), 0.5 * (1 + 2 / 3), places=12)
        self.assertEqual(average_precision([0, 0, 0, 0], 2), 0.0)

    def test_zero_relevant(self):
        with self.assertRaises(DatasetError):
            average_precision([0, 0], 0)


class TestMeanAveragePrecision(unittest.TestCase):

    def test_perfect_separation(self):
        index = make_index([[0, 0], [0, 1], [10, 0], [10, 1]], labels=["a", "a", "b", "b"])
        self.assertEqual(mean_average_precision(index), 1.0)

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            n = int(rng.integers(4, 41))
            n_classes = int(rng.integers(2, 6))
            labels = [f"c{i % n_classes}" for i in range(n)]
            rng.shuffle(labels)
            feats = rng.normal(size=(n, 4))
            ids = [f"m{i:03d}" for i in range(n)]
            index = make_index(feats, labels=labels, ids=ids)
            counts = {c: labels.count(c) for c in set(labels)}
            queries = [i for i, c in zip(ids, labels) if counts[c] > 1]
            if not queries:
                continue
            expected = brute_force_map(ids, labels, feats.tolist(), queries)
            self.assertAlmostEqual(mean_average_precision(index, queries), expected, delta=1e-12)

    def test_random_features_near_prior(self):
        rng = np.random.default_rng(2)
        n_classes, n = 4, 200
        labels = [f"c{i % n_classes}" for i in range(n)]
        index = make_index(rng.normal(size=(n, 8)), labels=labels, ids=[f"m{i}" for i in range(n)])
        value = mean_average_precision(index)
        self.assertGreater(value, 0.5 / n_classes)
        self.assertLess(value, 2.0 / n_classes)

    def test_singleton_class_excluded(self):
        index = make_index([[0, 0], [0, 1], [10, 0]], labels=["a", "a", "b"])
        with self.assertLogs("walkssl.core.eval.retrieval", level="WARNING"):
            report = retrieval_report(index)
        self.assertEqual(report["excluded"], ["C"])
        self.assertEqual(report["n_queries"], 2)
        self.assertEqual(report["per_class_ap"], {"a": 1.0})

    def test_no_valid_query(self):
        index = make_index([[0, 0], [1, 0]], labels=["a", "b"])
        with self.assertLogs("walkssl.core.eval.retrieval", level="WARNING"):
            with self.assertRaises(DatasetError):
                retrieval_report(index)

    def test_threads_do_not_change_result(self):
        rng = np.random.default_rng(5)
        labels = [f"c{i % 3}" for i in range(30)]
        index = make_index(rng.normal(size=(30, 5)), labels=labels, ids=[f"m{i}" for i in range(30)])
        self.assertEqual(retrieval_report(index, threads=1), retrieval_report(index, threads=4))

    def test_precision_at_k(self):
        index = make_index([[0, 0], [0, 1], [10, 0], [10, 1]], labels=["a", "a", "b", "b"])
        self.assertEqual(precision_at_k(index, "A", 1), 1.0)
        self.assertEqual(precision_at_k(index, "A", 2), 0.5)


class TestBuildIndex(unittest.TestCase):

    def setUp(self):
        self.features = [
            FeatureVector(values=[float(i), 0.0], source_id=f"m{i}", label="a" if i < 2 else "b")
            for i in range(4)
        ]
        self.splits = {"m0": "train", "m1": "test", "m2": "train", "m3": "test"}

    def test_scope_all(self):
        index, queries = build_index(self.features, self.splits, "all")
        self.assertEqual(len(index), 4)
        self.assertEqual(queries, ["m1", "m3"])

    def test_scope_test(self):
        index, queries = build_index(self.features, self.splits, "test")
        self.assertEqual(index.source_ids, ["m1", "m3"])
        self.assertEqual(queries, ["m1", "m3"])

    def test_no_splits_queries_everything(self):
        _, queries = build_index(self.features)
        self.assertEqual(queries, ["m0", "m1", "m2", "m3"])


def blobs(seed, n=50, offset=3.0, spread=0.5):
    rng = np.random.default_rng(seed)
    a = rng.normal(-offset, spread, size=(n, 2))
    b = rng.normal(offset, spread, size=(n, 2))
    return np.vstack([a, b]), ["neg"] * n + ["pos"] * n


class TestSvm(unittest.TestCase):

    def test_separable_toy(self):
        x, y = blobs(0)
        model = svm_train(list(x), y, reg_strength=1e-2, epochs=50, seed=0)
        self.assertEqual(model.classes, ["neg", "pos"])
        self.assertEqual(accuracy(svm_predict_many(model, list(x)), y), 1.0)

    def test_feature_vectors_carry_labels(self):
        x, y = blobs(1)
        feats = [FeatureVector(values=v, source_id=f"m{i}", label=l) for i, (v, l) in enumerate(zip(x, y))]
        model = svm_train(feats, reg_strength=1e-2, epochs=50)
        self.assertEqual(svm_predict(model, feats[0]), "neg")
        self.assertEqual(svm_predict(model, feats[-1]), "pos")
        report = classification_report(model, feats)
        self.assertEqual(report["accuracy"], 1.0)
        self.assertEqual(report["confusion_matrix"], [[50, 0], [0, 50]])

    def test_deterministic_per_seed(self):
        x, y = blobs(2)
        a = svm_train(list(x), y, epochs=10, seed=7)
        b = svm_train(list(x), y, epochs=10, seed=7)
        np.testing.assert_array_equal(a.weights, b.weights)
        np.testing.assert_array_equal(a.biases, b.biases)

    def test_objective_decreases(self):
        x, y = blobs(3)
        model = svm_train(list(x), y, epochs=40, seed=0)
        trace = model.objective
        self.assertEqual(len(trace), 41)
        self.assertAlmostEqual(trace[0], 1.0, places=12)
        self.assertLess(trace[-1], trace[0])
        half = len(trace) // 2
        self.assertLessEqual(np.mean(trace[half:]), np.mean(trace[:half]))

    def test_shuffled_labels_near_prior(self):
        x, _ = blobs(4, n=200)
        rng = np.random.default_rng(9)
        y = rng.choice(["neg", "pos"], size=x.shape[0]).tolist()
        train, held = np.arange(0, 400, 2), np.arange(1, 400, 2)
        model = svm_train(list(x[train]), [y[i] for i in train], epochs=10)
        acc = accuracy(svm_predict_many(model, list(x[held])), [y[i] for i in held])
        self.assertGreater(acc, 0.3)
        self.assertLess(acc, 0.7)

    def test_three_classes(self):
        rng = np.random.default_rng(6)
        centers = np.array([[0, 8], [8, 0], [-8, -8]], dtype=float)
        x = np.vstack([c + rng.normal(0, 0.5, size=(30, 2)) for c in centers])
        y = ["a"] * 30 + ["b"] * 30 + ["c"] * 30
        model = svm_train(list(x), y, reg_strength=1e-2, epochs=50)
        self.assertEqual(model.weights.shape, (3, 2))
        self.assertEqual(accuracy(svm_predict_many(model, list(x)), y), 1.0)

    def test_single_class(self):
        with self.assertRaises(DatasetError):
            svm_train([[0.0, 1.0], [1.0, 0.0]], ["a", "a"])

    def test_bad_reg_strength(self):
        with self.assertRaises(ConfigError):
            svm_train([[0.0], [1.0]], ["a", "b"], reg_strength=0.0)

    def test_zero_weights_tie_to_first_class(self):
        model = SvmModel(
            classes=["a", "b", "c"],
            weights=np.zeros((3, 4)),
            biases=np.zeros(3),
            mean=np.zeros(4),
            scale=np.ones(4),
        )
        self.assertEqual(svm_predict(model, [1.0, 2.0, 3.0, 4.0]), "a")

    def test_positive_margin_of_one_class(self):
        model = SvmModel(
            classes=["a", "b"],
            weights=[[1.0, 0.0], [0.0, 1.0]],
            biases=[0.0, 0.0],
            mean=[1.0, 1.0],
            scale=[2.0, 2.0],
        )
        self.assertEqual(svm_predict(model, [1.0, 5.0]), "b")
        np.testing.assert_allclose(model.decision_function([1.0, 5.0]), [0.0, 2.0])

    def test_dimension_mismatch(self):
        x, y = blobs(5, n=10)
        model = svm_train(list(x), y, epochs=2)
        with self.assertRaises(DimensionError):
            svm_predict(model, [1.0, 2.0, 3.0])

    def test_grid_search(self):
        x, y = blobs(8, n=30)
        best, scores = svm_grid_search(list(x), y, grid=(1e-3, 1e-1), epochs=10)
        self.assertEqual(set(scores), {1e-3, 1e-1})
        self.assertIn(best, scores)
        self.assertEqual(scores[best], max(scores.values()))

    def test_holdout_split_is_stratified(self):
        labels = ["a"] * 10 + ["b"] * 5 + ["c"]
        mask = holdout_split(labels, 0.2, seed=1)
        self.assertEqual(int(mask[:10].sum()), 2)
        self.assertEqual(int(mask[10:15].sum()), 1)
        self.assertFalse(mask[15])
        np.testing.assert_array_equal(mask, holdout_split(labels, 0.2, seed=1))


class TestAccuracy(unittest.TestCase):

    def test_values(self):
        self.assertEqual(accuracy(["a", "b"], ["a", "b"]), 1.0)
        self.assertEqual(accuracy(["a", "b"], ["b", "a"]), 0.0)
        self.assertEqual(accuracy(["a", "a", "b", "b"], ["a", "a", "b", "a"]), 0.75)

    def test_empty(self):
        with self.assertRaises(DatasetError):
            accuracy([], [])

    def test_length_mismatch(self):
        with self.assertRaises(DimensionError):
            accuracy(["a"], ["a", "b"])

    def test_confusion_matrix(self):
        cm = confusion_matrix(["a", "b", "b", "a"], ["a", "b", "a", "a"], classes=["a", "b", "c"])
        self.assertEqual(cm.loc["a", "a"], 2)
        self.assertEqual(cm.loc["a", "b"], 1)
        self.assertEqual(cm.loc["b", "b"], 1)
        self.assertEqual(int(cm.loc["c"].sum()), 0)
        self.assertEqual(cm.shape, (3, 3))


class TestReports(unittest.TestCase):

    def test_round_trip_and_compare(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_report({"map": 0.9, "per_class_ap": {"a": 0.9}}, Path(tmp) / "retrieval.json")
            self.assertEqual(read_report(path)["map"], 0.9)
        df = compare_reports(
            {"clustering": {"map": 0.9, "accuracy": 0.95}, "no_clustering": {"map": 0.8}}
        )
        self.assertEqual(list(df.index), ["clustering", "no_clustering"])
        self.assertEqual(df.loc["no_clustering", "map"], 0.8)
        self.assertTrue(np.isnan(df.loc["no_clustering", "accuracy"]))


if __name__ == "__main__":
    unittest.main()
