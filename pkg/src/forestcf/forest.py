"""Random-forest model representation, validation, inference and JSON I/O.

Trees are flat node arrays: internal nodes carry (feature, threshold, left,
right) with child indices pointing strictly past the parent, leaves carry a
class label. Descent takes the left branch when value <= threshold. The forest
predicts by majority vote over its trees, ties going to the smaller class
index. Every consumer of a Forest may assume these rules; the logic encoding
mirrors them exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class ModelValidationError(ValueError):
    """A model description violates a structural invariant."""

    def __init__(self, message: str, tree: int = -1, node: int = -1):
        super().__init__(message)
        self.tree = tree
        self.node = node


class EmptyForest(ModelValidationError):
    pass


class CyclicTree(ModelValidationError):
    """A child index does not point strictly past its parent."""


class DanglingChildIndex(ModelValidationError):
    pass


class SharedSubtree(ModelValidationError):
    """A node is referenced by more than one parent (the array is not a tree)."""


class FeatureIndexOutOfRange(ModelValidationError):
    pass


class LabelOutOfRange(ModelValidationError):
    pass


class NonFiniteThreshold(ModelValidationError):
    pass


class DepthExceeded(ModelValidationError):
    pass


@dataclass(frozen=True)
class TreeNode:
    """One slot of a flat tree array; a leaf iff label >= 0."""

    feature: int
    threshold: float
    left: int
    right: int
    label: int

    @staticmethod
    def internal(feature: int, threshold: float, left: int, right: int) -> "TreeNode":
        return TreeNode(feature, float(threshold), left, right, -1)

    @staticmethod
    def leaf(label: int) -> "TreeNode":
        return TreeNode(-1, 0.0, -1, -1, label)

    @property
    def is_leaf(self) -> bool:
        return self.label >= 0


Tree = tuple  # tuple[TreeNode, ...]


@dataclass(frozen=True)
class Forest:
    """Validated, immutable forest. Construct via validate_model or the trainer."""

    trees: tuple
    n_features: int
    n_classes: int
    feature_names: tuple
    feature_ranges: tuple  # per feature (min, max), from the training data

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    @cached_property
    def _tree_arrays(self):
        """Per-tree numpy views (feature, threshold, left, right, label) for batch eval."""
        arrays = []
        for tree in self.trees:
            arrays.append(
                (
                    np.array([n.feature for n in tree], dtype=np.int64),
                    np.array([n.threshold for n in tree], dtype=np.float64),
                    np.array([n.left for n in tree], dtype=np.int64),
                    np.array([n.right for n in tree], dtype=np.int64),
                    np.array([n.label for n in tree], dtype=np.int64),
                )
            )
        return arrays

    @cached_property
    def range_widths(self) -> np.ndarray:
        return np.array([hi - lo for lo, hi in self.feature_ranges], dtype=np.float64)


def check_instance(values: Sequence[float], n_features: int) -> np.ndarray:
    """Coerce an instance to a float vector, rejecting wrong length or non-finite entries."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != n_features:
        raise ValueError(f"instance has {x.size} values, model expects {n_features}")
    if not np.all(np.isfinite(x)):
        raise ValueError("instance contains non-finite values")
    return x


def predict_tree(tree: Sequence[TreeNode], x: Sequence[float]) -> int:
    """Descend from the root; left branch when x[feature] <= threshold."""
    node = tree[0]
    while not node.is_leaf:
        if x[node.feature] <= node.threshold:
            node = tree[node.left]
        else:
            node = tree[node.right]
    return node.label


def vote_counts(forest: Forest, x: Sequence[float]) -> list[int]:
    counts = [0] * forest.n_classes
    for tree in forest.trees:
        counts[predict_tree(tree, x)] += 1
    return counts


def predict_forest(forest: Forest, x: Sequence[float]) -> int:
    """Majority vote over trees; ties resolve to the smaller class index."""
    counts = vote_counts(forest, x)
    return counts.index(max(counts))


def vote_counts_batch(forest: Forest, X: np.ndarray) -> np.ndarray:
    """Vote counts for every row of X, shape (n_rows, n_classes)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    n = X.shape[0]
    counts = np.zeros((n, forest.n_classes), dtype=np.int64)
    rows = np.arange(n)
    for feature, threshold, left, right, label in forest._tree_arrays:
        pos = np.zeros(n, dtype=np.int64)
        active = label[pos] < 0
        while np.any(active):
            idx = pos[active]
            go_left = X[rows[active], feature[idx]] <= threshold[idx]
            pos[active] = np.where(go_left, left[idx], right[idx])
            active = label[pos] < 0
        counts[rows, label[pos]] += 1
    return counts


def predict_batch(forest: Forest, X: np.ndarray) -> np.ndarray:
    """Majority-vote labels for every row of X (argmax keeps the smaller index on ties)."""
    return np.argmax(vote_counts_batch(forest, X), axis=1)


def vote_fraction_batch(forest: Forest, X: np.ndarray) -> np.ndarray:
    """Fraction of trees voting class 1, per row. The real-valued model output
    used by the attribution methods."""
    if forest.n_classes != 2:
        raise ValueError("vote fraction is defined for binary forests")
    return vote_counts_batch(forest, X)[:, 1] / forest.n_trees


def vote_fraction(forest: Forest, x: Sequence[float]) -> float:
    return float(vote_counts(forest, x)[1]) / forest.n_trees


def max_depth_of(tree: Sequence[TreeNode]) -> int:
    """Longest root-to-leaf path, counted in edges."""
    best = 0
    stack = [(0, 0)]
    while stack:
        idx, depth = stack.pop()
        node = tree[idx]
        if node.is_leaf:
            best = max(best, depth)
        else:
            stack.append((node.left, depth + 1))
            stack.append((node.right, depth + 1))
    return best


def _validate_tree(nodes: Sequence[TreeNode], tree_idx: int, n_features: int,
                   n_classes: int, max_depth: int | None) -> None:
    n = len(nodes)
    if n == 0:
        raise EmptyForest(f"tree {tree_idx} has no nodes", tree=tree_idx)
    referenced = set()
    for i, node in enumerate(nodes):
        if node.is_leaf:
            if node.label >= n_classes:
                raise LabelOutOfRange(
                    f"tree {tree_idx} node {i}: class {node.label} >= n_classes {n_classes}",
                    tree=tree_idx, node=i)
            continue
        if not (0 <= node.feature < n_features):
            raise FeatureIndexOutOfRange(
                f"tree {tree_idx} node {i}: feature {node.feature} out of range",
                tree=tree_idx, node=i)
        if not np.isfinite(node.threshold):
            raise NonFiniteThreshold(
                f"tree {tree_idx} node {i}: non-finite threshold", tree=tree_idx, node=i)
        for child in (node.left, node.right):
            if child >= n:
                raise DanglingChildIndex(
                    f"tree {tree_idx} node {i}: child {child} past end of array",
                    tree=tree_idx, node=i)
            if child <= i:
                raise CyclicTree(
                    f"tree {tree_idx} node {i}: child {child} does not point past its parent",
                    tree=tree_idx, node=i)
            if child in referenced:
                raise SharedSubtree(
                    f"tree {tree_idx} node {i}: node {child} already has a parent",
                    tree=tree_idx, node=i)
            referenced.add(child)
    if max_depth is not None and max_depth_of(nodes) > max_depth:
        raise DepthExceeded(
            f"tree {tree_idx} exceeds max depth {max_depth}", tree=tree_idx)


def make_forest(trees: Iterable[Sequence[TreeNode]], n_features: int, n_classes: int,
                feature_names: Sequence[str], feature_ranges: Sequence,
                max_depth: int | None = None) -> Forest:
    """Assemble and validate a Forest from in-memory node arrays."""
    trees = tuple(tuple(t) for t in trees)
    if not trees:
        raise EmptyForest("forest has no trees")
    if n_classes < 2:
        raise ModelValidationError("n_classes must be at least 2")
    if len(feature_names) != n_features or len(feature_ranges) != n_features:
        raise ModelValidationError("feature metadata length does not match n_features")
    ranges = tuple((float(lo), float(hi)) for lo, hi in feature_ranges)
    for f, (lo, hi) in enumerate(ranges):
        if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
            raise ModelValidationError(f"feature {f} has invalid range ({lo}, {hi})")
    for t, nodes in enumerate(trees):
        _validate_tree(nodes, t, n_features, n_classes, max_depth)
    return Forest(trees=trees, n_features=n_features, n_classes=n_classes,
                  feature_names=tuple(str(s) for s in feature_names),
                  feature_ranges=ranges)


def _node_from_dict(raw: dict, tree_idx: int, node_idx: int) -> TreeNode:
    kind = raw.get("kind")
    if kind == "leaf":
        return TreeNode.leaf(int(raw["class"]))
    if kind == "internal":
        return TreeNode.internal(int(raw["feature"]), float(raw["threshold"]),
                                 int(raw["left"]), int(raw["right"]))
    raise ModelValidationError(
        f"tree {tree_idx} node {node_idx}: unknown kind {kind!r}",
        tree=tree_idx, node=node_idx)


def validate_model(raw: dict, max_depth: int | None = None) -> Forest:
    """Build a Forest from the JSON model dict, checking every invariant."""
    try:
        n_features = int(raw["n_features"])
        n_classes = int(raw["n_classes"])
        names = list(raw["feature_names"])
        ranges = list(raw["feature_ranges"])
        raw_trees = list(raw["trees"])
    except (KeyError, TypeError) as exc:
        raise ModelValidationError(f"malformed model document: {exc}") from exc
    trees = []
    for t, raw_nodes in enumerate(raw_trees):
        trees.append(tuple(_node_from_dict(n, t, i) for i, n in enumerate(raw_nodes)))
    return make_forest(trees, n_features, n_classes, names, ranges, max_depth=max_depth)


def to_model_dict(forest: Forest) -> dict:
    """Canonical JSON-ready dict; key order is part of the format."""
    trees = []
    for nodes in forest.trees:
        out = []
        for node in nodes:
            if node.is_leaf:
                out.append({"kind": "leaf", "class": node.label})
            else:
                out.append({"kind": "internal", "feature": node.feature,
                            "threshold": node.threshold,
                            "left": node.left, "right": node.right})
        trees.append(out)
    return {
        "n_features": forest.n_features,
        "n_classes": forest.n_classes,
        "feature_names": list(forest.feature_names),
        "feature_ranges": [[lo, hi] for lo, hi in forest.feature_ranges],
        "trees": trees,
    }


def save_model(forest: Forest, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_model_dict(forest), fh, indent=2)
        fh.write("\n")


def load_model(path, max_depth: int | None = None) -> Forest:
    with open(path) as fh:
        return validate_model(json.load(fh), max_depth=max_depth)
