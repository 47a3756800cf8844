import json
import random

import numpy as np
import pytest

from forestcf.forest import (
    CyclicTree,
    DanglingChildIndex,
    EmptyForest,
    FeatureIndexOutOfRange,
    TreeNode,
    load_model,
    make_forest,
    predict_batch,
    predict_forest,
    predict_tree,
    save_model,
    to_model_dict,
    validate_model,
    vote_counts_batch,
)

from helpers import random_lattice_forest, reference_predict_tree, tally_predict_forest


def leaf_tree(label):
    return [TreeNode.leaf(label)]


def stump(feature, threshold, left_label, right_label):
    return [TreeNode.internal(feature, threshold, 1, 2),
            TreeNode.leaf(left_label), TreeNode.leaf(right_label)]


class TestPredictTree:
    def test_single_leaf(self):
        assert predict_tree(leaf_tree(1), [123.0]) == 1

    def test_stump_descent(self):
        tree = stump(0, 0.5, 0, 1)
        assert predict_tree(tree, [0.3]) == 0
        assert predict_tree(tree, [0.7]) == 1

    def test_boundary_goes_left(self):
        assert predict_tree(stump(0, 0.5, 0, 1), [0.5]) == 0

    def test_matches_recursive_reference(self):
        rnd = random.Random(7)
        for _ in range(20):
            forest = random_lattice_forest(rnd, n_features=4, n_trees=1, depth=3)
            tree = forest.trees[0]
            for _ in range(100):
                x = [rnd.random() for _ in range(4)]
                assert predict_tree(tree, x) == reference_predict_tree(tree, x)


class TestPredictForest:
    def test_majority(self):
        forest = make_forest([stump(0, 0.5, 0, 0), stump(0, 0.6, 0, 0),
                              stump(0, 0.4, 1, 1)], 1, 2, ["f0"], [(0, 1)])
        assert predict_forest(forest, [0.5]) == 0

    def test_tie_breaks_low(self):
        forest = make_forest([leaf_tree(0), leaf_tree(1)], 1, 2, ["f0"], [(0, 1)])
        assert predict_forest(forest, [0.0]) == 0

    def test_matches_tally_oracle(self):
        rnd = random.Random(11)
        for _ in range(15):
            forest = random_lattice_forest(rnd, n_features=3, n_trees=5, depth=3)
            for _ in range(50):
                x = [rnd.random() for _ in range(3)]
                assert predict_forest(forest, x) == tally_predict_forest(forest, x)

    def test_batch_agrees_with_scalar(self):
        rnd = random.Random(3)
        forest = random_lattice_forest(rnd, n_features=3, n_trees=7, depth=3)
        X = np.array([[rnd.random() for _ in range(3)] for _ in range(200)])
        batch = predict_batch(forest, X)
        for row, label in zip(X, batch):
            assert predict_forest(forest, row) == label

    def test_vote_counts_sum_to_tree_count(self):
        rnd = random.Random(5)
        forest = random_lattice_forest(rnd, n_trees=9)
        X = np.array([[rnd.random() for _ in range(3)] for _ in range(40)])
        assert (vote_counts_batch(forest, X).sum(axis=1) == 9).all()


class TestValidation:
    def base_doc(self):
        return {
            "n_features": 2,
            "n_classes": 2,
            "feature_names": ["a", "b"],
            "feature_ranges": [[0.0, 1.0], [0.0, 1.0]],
            "trees": [[{"kind": "internal", "feature": 0, "threshold": 0.5,
                        "left": 1, "right": 2},
                       {"kind": "leaf", "class": 0},
                       {"kind": "leaf", "class": 1}]],
        }

    def test_valid_doc_round_trips(self, tmp_path):
        forest = validate_model(self.base_doc())
        path = tmp_path / "m.json"
        save_model(forest, path)
        again = load_model(path)
        assert to_model_dict(again) == to_model_dict(forest)
        # and byte-identical modulo whitespace
        a = json.dumps(to_model_dict(forest), separators=(",", ":"))
        b = json.dumps(json.load(open(path)), separators=(",", ":"))
        assert a == b

    def test_self_pointing_child_is_cyclic(self):
        doc = self.base_doc()
        doc["trees"][0][0]["left"] = 0
        with pytest.raises(CyclicTree):
            validate_model(doc)

    def test_backward_child_is_cyclic(self):
        doc = self.base_doc()
        doc["trees"][0].append({"kind": "internal", "feature": 1, "threshold": 0.5,
                                "left": 1, "right": 2})
        doc["trees"][0][0]["right"] = 3
        with pytest.raises(CyclicTree):
            validate_model(doc)

    def test_dangling_child(self):
        doc = self.base_doc()
        doc["trees"][0][0]["right"] = 9
        with pytest.raises(DanglingChildIndex):
            validate_model(doc)

    def test_feature_out_of_range(self):
        doc = self.base_doc()
        doc["trees"][0][0]["feature"] = 2
        with pytest.raises(FeatureIndexOutOfRange) as err:
            validate_model(doc)
        assert err.value.tree == 0 and err.value.node == 0

    def test_empty_forest(self):
        doc = self.base_doc()
        doc["trees"] = []
        with pytest.raises(EmptyForest):
            validate_model(doc)

    def test_depth_cap(self):
        from forestcf.forest import DepthExceeded

        doc = self.base_doc()
        with pytest.raises(DepthExceeded):
            validate_model(doc, max_depth=0)

    def test_predictions_survive_round_trip(self, tmp_path):
        rnd = random.Random(9)
        forest = random_lattice_forest(rnd, n_features=3, n_trees=10, depth=4)
        path = tmp_path / "m.json"
        save_model(forest, path)
        again = load_model(path)
        X = np.array([[rnd.random() for _ in range(3)] for _ in range(100)])
        assert (predict_batch(forest, X) == predict_batch(again, X)).all()
