import pathlib

import pytest

from forestcf.counterfactual import CounterfactualQuery, find_min_counterfactual
from forestcf.data import load_csv, split
from forestcf.encoding import extract_thresholds
from forestcf.forest import TreeNode, make_forest
from forestcf.train import TrainConfig, train_forest

REPO_ROOT = pathlib.Path(__file__).resolve().parent.parent
BREAST_CANCER_CSV = REPO_ROOT / "data" / "breast_cancer.csv"

SPLIT_SEED = 2024


@pytest.fixture(scope="session")
def bc_raw():
    return load_csv(BREAST_CANCER_CSV, "diagnosis")


@pytest.fixture(scope="session")
def bc_split(bc_raw):
    return split(bc_raw, 0.5, seed=SPLIT_SEED)


@pytest.fixture(scope="session")
def bc_model(bc_split):
    train_d, _ = bc_split
    return train_forest(train_d, TrainConfig(seed=SPLIT_SEED))


@pytest.fixture(scope="session")
def bc_counterfactuals(bc_model, bc_split):
    """One minimal counterfactual per test row plus the wall-clock seconds it
    took; shared by report, acceptance and cohort tests since it is the
    expensive part of the pipeline."""
    import time

    _, test_d = bc_split
    tmap = extract_thresholds(bc_model)
    start = time.perf_counter()
    results = []
    for row in test_d.features:
        query = CounterfactualQuery(instance=tuple(row))
        results.append(find_min_counterfactual(bc_model, query, tmap=tmap))
    elapsed = time.perf_counter() - start
    return results, elapsed


@pytest.fixture
def stump_forest():
    """Single stump on feature 0 at 0.5: left -> class 0, right -> class 1."""
    tree = [TreeNode.internal(0, 0.5, 1, 2), TreeNode.leaf(0), TreeNode.leaf(1)]
    return make_forest([tree], 1, 2, ["f0"], [(0.0, 1.0)])


@pytest.fixture
def constant_forest():
    """Every tree is the single leaf class 0; nothing can flip it."""
    tree = [TreeNode.leaf(0)]
    return make_forest([tree, tree, tree], 2, 2, ["f0", "f1"],
                       [(0.0, 1.0), (0.0, 1.0)])
