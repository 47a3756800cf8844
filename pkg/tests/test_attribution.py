import random

import numpy as np
import pytest

from forestcf.attribution import (
    AttributionResult,
    SingularFit,
    TooManyFeatures,
    lime_lite,
    rank_stability,
    shapley_all_orders,
    shapley_exact,
    shapley_mc,
    stability_curves,
    value_function,
)
from forestcf.forest import TreeNode, make_forest, vote_fraction

from helpers import random_lattice_forest, value_oracle, permutation_shapley_oracle


def stump(feature, threshold):
    return [TreeNode.internal(feature, threshold, 1, 2),
            TreeNode.leaf(0), TreeNode.leaf(1)]


def small_forest(n_features=4, n_trees=5, seed=2):
    rnd = random.Random(seed)
    return random_lattice_forest(rnd, n_features=n_features, n_trees=n_trees, depth=3)


def background(n_features, rows=24, seed=0):
    gen = np.random.default_rng(seed)
    return gen.random((rows, n_features))


class TestValueFunction:
    def test_full_mask_is_model_output(self):
        forest = small_forest()
        bg = background(4)
        x = np.array([0.3, 0.6, 0.2, 0.8])
        v = value_function(forest, x, np.ones(4, dtype=bool), bg)
        assert v == pytest.approx(vote_fraction(forest, x))

    def test_empty_mask_is_background_mean(self):
        forest = small_forest()
        bg = background(4)
        x = np.array([0.3, 0.6, 0.2, 0.8])
        v = value_function(forest, x, np.zeros(4, dtype=bool), bg)
        expected = np.mean([vote_fraction(forest, row) for row in bg])
        assert v == pytest.approx(expected)

    def test_agrees_with_double_loop_oracle(self):
        rnd = random.Random(17)
        forest = small_forest(seed=17)
        bg = background(4, rows=12, seed=17)
        for _ in range(25):
            x = np.array([rnd.random() for _ in range(4)])
            mask = np.array([rnd.random() < 0.5 for _ in range(4)])
            assert value_function(forest, x, mask, bg) == pytest.approx(
                value_oracle(forest, x, mask, bg))


class TestShapleyExact:
    def test_dummy_feature_gets_zero(self):
        # the model never looks at feature 1
        forest = make_forest([stump(0, 0.5)], 2, 2, ["a", "b"], [(0, 1), (0, 1)])
        bg = background(2)
        res = shapley_exact(forest, [0.3, 0.9], bg)
        assert res.phi[1] == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_features_get_equal_phi(self):
        # two stumps, one per feature, same threshold; a background symmetric
        # under swapping the two columns makes the features interchangeable
        forest = make_forest([stump(0, 0.5), stump(1, 0.5)], 2, 2,
                             ["a", "b"], [(0, 1), (0, 1)])
        gen = np.random.default_rng(3)
        half = gen.random((20, 2))
        bg = np.vstack([half, half[:, ::-1]])
        res = shapley_exact(forest, [0.7, 0.7], bg)
        assert res.phi[0] == pytest.approx(res.phi[1], abs=1e-12)

    def test_efficiency(self):
        forest = small_forest(n_features=6, seed=5)
        bg = background(6, rows=16, seed=5)
        x = background(6, rows=1, seed=6)[0]
        res = shapley_exact(forest, x, bg)
        assert sum(res.phi) == pytest.approx(vote_fraction(forest, x) - res.baseline,
                                             abs=1e-9)

    def test_matches_permutation_oracle_8_features(self):
        forest = small_forest(n_features=8, n_trees=4, seed=8)
        bg = background(8, rows=10, seed=8)
        x = background(8, rows=1, seed=9)[0]
        res = shapley_exact(forest, x, bg)
        oracle = permutation_shapley_oracle(forest, x, bg)
        assert np.abs(np.array(res.phi) - oracle).max() < 1e-9

    def test_too_many_features(self):
        forest = small_forest(n_features=16, n_trees=1, seed=1)
        with pytest.raises(TooManyFeatures):
            shapley_exact(forest, [0.5] * 16, background(16))


class TestShapleyMc:
    def test_all_orders_of_three_features_equals_exact(self):
        forest = small_forest(n_features=3, seed=4)
        bg = background(3, rows=16, seed=4)
        x = np.array([0.4, 0.6, 0.3])
        exact = shapley_exact(forest, x, bg)
        allorders = shapley_all_orders(forest, x, bg)
        assert np.array(allorders.phi) == pytest.approx(np.array(exact.phi), abs=1e-12)

    def test_deterministic_per_seed(self):
        forest = small_forest()
        bg = background(4)
        x = np.array([0.2, 0.5, 0.7, 0.4])
        a = shapley_mc(forest, x, bg, n_permutations=50, seed=11)
        b = shapley_mc(forest, x, bg, n_permutations=50, seed=11)
        assert a.phi == b.phi and a.stderr == b.stderr

    def test_within_three_standard_errors_of_exact(self):
        forest = small_forest(n_features=10, n_trees=5, seed=10)
        bg = background(10, rows=12, seed=10)
        x = background(10, rows=1, seed=11)[0]
        exact = shapley_exact(forest, x, bg)
        mc = shapley_mc(forest, x, bg, n_permutations=2000, seed=0)
        for i in range(10):
            bound = 3 * mc.stderr[i] + 1e-12  # exact-zero features have zero stderr
            assert abs(mc.phi[i] - exact.phi[i]) <= bound

    def test_unbiasedness_across_seeds(self):
        forest = small_forest(n_features=5, seed=21)
        bg = background(5, rows=10, seed=21)
        x = np.array([0.3, 0.8, 0.5, 0.2, 0.6])
        exact = np.array(shapley_exact(forest, x, bg).phi)
        estimates = np.array([
            shapley_mc(forest, x, bg, n_permutations=40, seed=s).phi
            for s in range(60)
        ])
        mean = estimates.mean(axis=0)
        sem = estimates.std(axis=0, ddof=1) / np.sqrt(len(estimates))
        assert (np.abs(mean - exact) <= 3 * sem + 1e-12).all()


class TestLimeLite:
    def test_constant_region_gives_zero_coefficients(self):
        forest = make_forest([[TreeNode.leaf(1)]], 3, 2, ["a", "b", "c"],
                             [(0, 1)] * 3)
        res = lime_lite(forest, [0.5, 0.5, 0.5], n_samples=200, kernel_width=None,
                        seed=0, feature_std=[0.1, 0.1, 0.1])
        assert np.abs(np.array(res.phi)).max() < 1e-9
        assert res.baseline == pytest.approx(1.0)

    def test_deterministic_per_seed(self):
        forest = small_forest()
        kwargs = dict(n_samples=100, kernel_width=None, seed=3,
                      feature_std=[0.2] * 4)
        a = lime_lite(forest, [0.5] * 4, **kwargs)
        b = lime_lite(forest, [0.5] * 4, **kwargs)
        assert a.phi == b.phi

    def test_stump_feature_dominates(self):
        forest = make_forest([stump(1, 0.5)], 3, 2, ["a", "b", "c"], [(0, 1)] * 3)
        wins = 0
        for seed in range(100):
            res = lime_lite(forest, [0.5, 0.45, 0.5], n_samples=120,
                            kernel_width=None, seed=seed, feature_std=[0.15] * 3)
            if res.ranking[0] == 1:
                wins += 1
        assert wins >= 95

    def test_needs_enough_samples(self):
        forest = small_forest()
        with pytest.raises(ValueError):
            lime_lite(forest, [0.5] * 4, n_samples=4, kernel_width=None,
                      seed=0, feature_std=[0.1] * 4)

    def test_singular_fit_detected(self):
        forest = small_forest()
        # zero spread makes every perturbation identical: rank-1 design
        with pytest.raises(SingularFit):
            lime_lite(forest, [0.5] * 4, n_samples=50, kernel_width=None,
                      seed=0, feature_std=[0.0] * 4)


def fake_result(ranking):
    n = len(ranking)
    phi = [0.0] * n
    for pos, f in enumerate(ranking):
        phi[f] = float(n - pos)
    return AttributionResult(method="test", phi=tuple(phi), baseline=0.0,
                             ranking=tuple(ranking))


class TestRankStability:
    def test_full_n_is_all_ones(self):
        results = [fake_result([0, 1, 2]), fake_result([2, 1, 0])]
        assert rank_stability(results, 3, 3).tolist() == [1.0, 1.0, 1.0]

    def test_single_point_is_zero_one(self):
        results = [fake_result([2, 0, 1])]
        probs = rank_stability(results, 2, 3)
        assert sorted(probs.tolist()) == [0.0, 1.0, 1.0]
        assert probs[2] == 1.0 and probs[0] == 1.0

    def test_curves_monotone_and_terminate_at_one(self):
        rnd = random.Random(12)
        results = []
        for _ in range(40):
            ranking = list(range(6))
            rnd.shuffle(ranking)
            results.append(fake_result(ranking))
        curves = stability_curves(results, 6)
        assert (np.diff(curves, axis=1) >= -1e-12).all()
        assert curves[:, -1] == pytest.approx(np.ones(6))
