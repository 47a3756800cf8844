"""Greedy CART training for decision trees and bagged forests.

Splits minimize weighted Gini impurity over a random feature subset, with
thresholds at midpoints of adjacent distinct sorted values. Zero-gain splits
are allowed (they are what make XOR-style interactions learnable); recursion
is bounded by depth, node purity and leaf size, and every split strictly
shrinks both sides, so training always terminates.

Determinism contract: tree t draws its bootstrap sample and feature subsets
from rng.stream(seed, t), so results do not depend on scheduling order and a
fixed seed reproduces the model byte for byte.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .data import Dataset, feature_ranges_of
from .forest import Forest, TreeNode, make_forest


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    n_trees: int = 10
    max_depth: int = 10
    bootstrap: bool = True
    features_per_split: int | None = None  # default ceil(sqrt(n_features))
    seed: int = 0
    min_samples_leaf: int = 1

    def resolved_mtry(self, n_features: int) -> int:
        mtry = self.features_per_split
        if mtry is None:
            mtry = math.ceil(math.sqrt(n_features))
        if not 1 <= mtry <= n_features:
            raise ValueError(f"features_per_split must be in [1, {n_features}]")
        return mtry

    def validate(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


def _majority(y: np.ndarray, n_classes: int) -> int:
    return int(np.argmax(np.bincount(y, minlength=n_classes)))


def _gini_counts(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.dot(p, p))


def _best_split_on_feature(values: np.ndarray, y: np.ndarray, n_classes: int,
                           min_leaf: int):
    """Best (weighted child impurity, threshold) for one feature, or None.

    Scans midpoints of adjacent distinct sorted values using cumulative class
    counts; ties keep the lowest threshold.
    """
    order = np.argsort(values, kind="stable")
    sv = values[order]
    sy = y[order]
    n = len(sv)
    boundaries = np.nonzero(sv[1:] > sv[:-1])[0] + 1  # split before these positions
    if len(boundaries) == 0:
        return None
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), sy] = 1
    prefix = np.cumsum(onehot, axis=0)
    total = prefix[-1]

    best = None
    for b in boundaries:
        if b < min_leaf or n - b < min_leaf:
            continue
        left_counts = prefix[b - 1]
        right_counts = total - left_counts
        score = (b / n) * _gini_counts(left_counts) + ((n - b) / n) * _gini_counts(right_counts)
        if best is None or score < best[0]:
            threshold = (sv[b - 1] + sv[b]) / 2.0
            best = (score, float(threshold), b)
    return best


def train_tree(X: np.ndarray, y: np.ndarray, cfg: TrainConfig,
               stream: rng.SplitMix64, n_classes: int) -> tuple:
    """Grow one tree on (X, y); returns the flat node array (preorder)."""
    if len(X) == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    cfg.validate()
    n_features = X.shape[1]
    mtry = cfg.resolved_mtry(n_features)
    nodes: list[TreeNode | None] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        node_id = len(nodes)
        nodes.append(None)
        sub_y = y[idx]
        counts = np.bincount(sub_y, minlength=n_classes)
        if depth >= cfg.max_depth or counts.max() == len(idx) or len(idx) < 2 * cfg.min_samples_leaf:
            nodes[node_id] = TreeNode.leaf(int(np.argmax(counts)))
            return node_id

        # Scan a fresh feature permutation: the first mtry entries are the
        # subset proper; if none of them admits a split, keep scanning the
        # rest so constant features do not silently truncate the tree.
        perm = stream.sample_indices(n_features, n_features)
        best = None  # (score, threshold, feature)
        for rank, f in enumerate(perm):
            if rank >= mtry and best is not None:
                break
            cand = _best_split_on_feature(X[idx, f], sub_y, n_classes, cfg.min_samples_leaf)
            if cand is not None and (best is None or cand[0] < best[0]):
                best = (cand[0], cand[1], f)
        if best is None:
            nodes[node_id] = TreeNode.leaf(int(np.argmax(counts)))
            return node_id

        _, threshold, feature = best
        left_mask = X[idx, feature] <= threshold
        left_id = grow(idx[left_mask], depth + 1)
        right_id = grow(idx[~left_mask], depth + 1)
        nodes[node_id] = TreeNode.internal(feature, threshold, left_id, right_id)
        return node_id

    grow(np.arange(len(X)), 0)
    return tuple(nodes)


def train_forest(train: Dataset, cfg: TrainConfig) -> Forest:
    """Train cfg.n_trees trees on independent bootstrap resamples."""
    cfg.validate()
    if train.n_samples == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    X, y = train.features, train.labels
    n = train.n_samples
    trees = []
    for t in range(cfg.n_trees):
        stream = rng.stream(cfg.seed, t)
        if cfg.bootstrap:
            sample = np.array([stream.next_below(n) for _ in range(n)], dtype=np.int64)
        else:
            sample = np.arange(n)
        trees.append(train_tree(X[sample], y[sample], cfg, stream, train.n_classes))
    return make_forest(trees, train.n_features, train.n_classes,
                       train.feature_names, feature_ranges_of(train),
                       max_depth=cfg.max_depth)


def accuracy(forest: Forest, d: Dataset) -> float:
    from .forest import predict_batch

    return float(np.mean(predict_batch(forest, d.features) == d.labels))
