"""Independent oracles and generators shared across the test suite.

Everything here deliberately re-derives results through a different algorithm
than the code under test: recursive descent instead of iterative, dense grids
instead of logic, truth tables instead of CDCL, double loops instead of
vectorization.
"""

from __future__ import annotations

import itertools
import random

import numpy as np

from forestcf.forest import Forest, TreeNode, make_forest


# -- reference model evaluation -------------------------------------------

def reference_predict_tree(tree, x, node_idx=0):
    """Recursive descent; the production evaluator is iterative."""
    node = tree[node_idx]
    if node.label >= 0:
        return node.label
    if x[node.feature] <= node.threshold:
        return reference_predict_tree(tree, x, node.left)
    return reference_predict_tree(tree, x, node.right)


def tally_predict_forest(forest, x):
    """Histogram + manual argmax with explicit low-index tie-break."""
    votes = {}
    for tree in forest.trees:
        label = reference_predict_tree(tree, x)
        votes[label] = votes.get(label, 0) + 1
    best_label, best_count = None, -1
    for label in sorted(votes):
        if votes[label] > best_count:
            best_label, best_count = label, votes[label]
    return best_label


# -- random small forests with lattice thresholds --------------------------

LATTICE = [round(0.1 * k, 1) for k in range(1, 10)]  # gap 0.1 on [0, 1]


def random_tree(rnd: random.Random, n_features: int, depth: int) -> list:
    """Full random tree of exactly `depth` levels over lattice thresholds."""
    nodes: list[TreeNode] = []

    def grow(level: int) -> int:
        idx = len(nodes)
        nodes.append(None)
        if level == depth or rnd.random() < 0.15:
            nodes[idx] = TreeNode.leaf(rnd.randint(0, 1))
            return idx
        feature = rnd.randrange(n_features)
        threshold = rnd.choice(LATTICE)
        left = grow(level + 1)
        right = grow(level + 1)
        nodes[idx] = TreeNode.internal(feature, threshold, left, right)
        return idx

    grow(0)
    return nodes


def random_lattice_forest(rnd: random.Random, n_features=3, n_trees=3, depth=2) -> Forest:
    trees = [random_tree(rnd, n_features, depth) for _ in range(n_trees)]
    return make_forest(trees, n_features, 2,
                       [f"f{i}" for i in range(n_features)],
                       [(0.0, 1.0)] * n_features)


# -- dense grid oracles -----------------------------------------------------

GRID_STEP = 0.045  # below half the lattice gap


def _axis_grid(lo: float, hi: float) -> np.ndarray:
    if hi <= lo:
        return np.array([lo])
    n = max(int(np.ceil((hi - lo) / GRID_STEP)) + 1, 2)
    return np.linspace(lo, hi, n)


def grid_points(box_lo, box_hi) -> np.ndarray:
    axes = [_axis_grid(lo, hi) for lo, hi in zip(box_lo, box_hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def grid_flip_exists(forest: Forest, box_lo, box_hi, forbidden: int) -> bool:
    """Exhaustive scan: does any grid point in the box flip the prediction?
    The grid includes box endpoints and is finer than half the threshold gap,
    so every threshold cell intersecting the box holds at least one point."""
    from forestcf.forest import predict_batch

    pts = grid_points(box_lo, box_hi)
    return bool(np.any(predict_batch(forest, pts) != forbidden))


def grid_min_flip_delta(forest: Forest, x, forbidden: int) -> float | None:
    """Smallest range-scaled L-infinity half-width reaching a flipping grid
    point, scanning the full training ranges."""
    from forestcf.forest import predict_batch

    lo = [r[0] for r in forest.feature_ranges]
    hi = [r[1] for r in forest.feature_ranges]
    pts = grid_points(lo, hi)
    flips = predict_batch(forest, pts) != forbidden
    if not np.any(flips):
        return None
    widths = np.array([b - a for a, b in forest.feature_ranges])
    scaled = np.abs(pts[flips] - np.asarray(x)) / widths
    return float(scaled.max(axis=1).min())


# -- truth-table SAT oracle -------------------------------------------------

def truth_table_sat(n_vars: int, clauses) -> bool:
    """Enumerate all assignments with numpy bit tricks (n_vars <= ~20)."""
    rows = np.arange(1 << n_vars, dtype=np.uint32)
    ok = np.ones(rows.shape, dtype=bool)
    for clause in clauses:
        clause_ok = np.zeros(rows.shape, dtype=bool)
        for lit in clause:
            bit = (rows >> (abs(lit) - 1)) & 1
            clause_ok |= (bit == 1) if lit > 0 else (bit == 0)
        ok &= clause_ok
        if not ok.any():
            return False
    return bool(ok.any())


def truth_table_models(n_vars: int, clauses) -> list:
    """All satisfying assignments as bool tuples (tiny n_vars only)."""
    models = []
    for bits in range(1 << n_vars):
        assignment = [(bits >> v) & 1 == 1 for v in range(n_vars)]
        if all(any(assignment[l - 1] if l > 0 else not assignment[-l - 1] for l in cl)
               for cl in clauses):
            models.append(tuple(assignment))
    return models


def random_3sat(rnd: random.Random, n_vars: int, n_clauses: int):
    clauses = []
    for _ in range(n_clauses):
        vs = rnd.sample(range(1, n_vars + 1), 3)
        clauses.append(tuple(v if rnd.random() < 0.5 else -v for v in vs))
    return tuple(clauses)


# -- attribution oracles ----------------------------------------------------

def value_oracle(forest: Forest, x, mask, background) -> float:
    """Double loop over (background rows, trees); no vectorization."""
    total = 0.0
    for row in background:
        composite = [x[i] if mask[i] else row[i] for i in range(len(x))]
        votes1 = sum(1 for tree in forest.trees
                     if reference_predict_tree(tree, composite) == 1)
        total += votes1 / forest.n_trees
    return total / len(background)


def permutation_shapley_oracle(forest: Forest, x, background) -> np.ndarray:
    """Average marginal contribution over every feature ordering, built on
    value_oracle; independent of the library's subset-weighted formula."""
    m = forest.n_features
    cache = {}

    def v(bits):
        if bits not in cache:
            mask = [(bits >> i) & 1 == 1 for i in range(m)]
            cache[bits] = value_oracle(forest, x, mask, background)
        return cache[bits]

    phi = np.zeros(m)
    count = 0
    for order in itertools.permutations(range(m)):
        bits = 0
        for i in order:
            with_i = bits | (1 << i)
            phi[i] += v(with_i) - v(bits)
            bits = with_i
        count += 1
    return phi / count
