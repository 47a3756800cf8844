"""Attribution baselines: exact and sampled Shapley values, plus a minimal
local linear surrogate.

The model output being attributed is the class-1 vote fraction, a real value
in [0, 1]. Absent features are marginalized interventionally: the coalition's
complement is filled in from background-data rows and the model output
averaged over them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .forest import Forest, check_instance, vote_fraction_batch


class TooManyFeatures(ValueError):
    """Exact enumeration is limited to 15 features; use shapley_mc instead."""


class SingularFit(RuntimeError):
    """The weighted surrogate design matrix is rank-deficient."""


@dataclass(frozen=True)
class AttributionResult:
    method: str
    phi: tuple                 # per-feature scores
    baseline: float            # background mean output (surrogate: intercept)
    ranking: tuple             # features by descending |phi|, ties by index
    stderr: tuple | None = None


def _rank(phi: np.ndarray) -> tuple:
    order = sorted(range(len(phi)), key=lambda i: (-abs(phi[i]), i))
    return tuple(order)


def value_function(forest: Forest, x, mask, background: np.ndarray) -> float:
    """Mean vote fraction over background rows with masked features set to x.

    mask[i] true means feature i takes its value from x; false means the
    feature is absent and each background row supplies it.
    """
    x = np.asarray(x, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    composite = np.array(background, dtype=np.float64, copy=True)
    composite[:, mask] = x[mask]
    return float(vote_fraction_batch(forest, composite).mean())


def _value_table(forest: Forest, x, background: np.ndarray, n_features: int) -> np.ndarray:
    """v(S) for every coalition bitmask S over n_features features."""
    table = np.empty(1 << n_features)
    mask = np.zeros(n_features, dtype=bool)
    for bits in range(1 << n_features):
        for i in range(n_features):
            mask[i] = bits & (1 << i)
        table[bits] = value_function(forest, x, mask, background)
    return table


def shapley_exact(forest: Forest, x, background: np.ndarray) -> AttributionResult:
    """Classic weighted-subset Shapley values by full coalition enumeration.

    phi_i = sum over S not containing i of
            |S|! (M - |S| - 1)! / M! * (v(S + i) - v(S)).
    """
    x = check_instance(x, forest.n_features)
    m = forest.n_features
    if m > 15:
        raise TooManyFeatures(f"{m} features; exact enumeration is capped at 15")
    v = _value_table(forest, x, background, m)
    fact = math.factorial
    weight = [fact(s) * fact(m - s - 1) / fact(m) for s in range(m)]
    phi = np.zeros(m)
    for bits in range(1 << m):
        size = bin(bits).count("1")
        for i in range(m):
            if bits & (1 << i):
                continue
            phi[i] += weight[size] * (v[bits | (1 << i)] - v[bits])
    return AttributionResult(method="shapley-exact", phi=tuple(float(p) for p in phi),
                             baseline=float(v[0]), ranking=_rank(phi))


def _ordered_marginals(forest: Forest, x, background: np.ndarray, orders,
                       cache: dict) -> list[list[float]]:
    """Marginal contribution of each feature along each ordering."""
    m = forest.n_features

    def v(bits: int) -> float:
        if bits not in cache:
            mask = np.array([(bits >> i) & 1 for i in range(m)], dtype=bool)
            cache[bits] = value_function(forest, x, mask, background)
        return cache[bits]

    per_feature: list[list[float]] = [[] for _ in range(m)]
    for order in orders:
        bits = 0
        for i in order:
            with_i = bits | (1 << int(i))
            per_feature[int(i)].append(v(with_i) - v(bits))
            bits = with_i
    return per_feature


def shapley_mc(forest: Forest, x, background: np.ndarray, n_permutations: int,
               seed: int) -> AttributionResult:
    """Monte-Carlo Shapley: average marginals over sampled feature orders."""
    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    x = check_instance(x, forest.n_features)
    m = forest.n_features
    rng = np.random.default_rng(seed)
    orders = [rng.permutation(m) for _ in range(n_permutations)]
    cache: dict = {}
    per_feature = _ordered_marginals(forest, x, background, orders, cache)
    phi = np.array([np.mean(c) for c in per_feature])
    stderr = np.array([
        np.std(c, ddof=1) / math.sqrt(len(c)) if len(c) > 1 else 0.0
        for c in per_feature
    ])
    return AttributionResult(method="shapley-mc", phi=tuple(float(p) for p in phi),
                             baseline=float(cache[0]), ranking=_rank(phi),
                             stderr=tuple(float(s) for s in stderr))


def shapley_all_orders(forest: Forest, x, background: np.ndarray) -> AttributionResult:
    """Average marginal contribution over every feature ordering.

    Mathematically equal to shapley_exact; kept as the exhaustive special
    case of the permutation estimator.
    """
    x = check_instance(x, forest.n_features)
    m = forest.n_features
    if m > 8:
        raise TooManyFeatures("all-orders enumeration is capped at 8 features")
    cache: dict = {}
    per_feature = _ordered_marginals(forest, x, background,
                                     itertools.permutations(range(m)), cache)
    phi = np.array([np.mean(c) for c in per_feature])
    return AttributionResult(method="shapley-all-orders",
                             phi=tuple(float(p) for p in phi),
                             baseline=float(cache[0]), ranking=_rank(phi))


def lime_lite(forest: Forest, x, n_samples: int, kernel_width: float | None,
              seed: int, feature_std) -> AttributionResult:
    """Weighted linear surrogate around x.

    Perturbations are Gaussian with per-feature scale feature_std (training
    data spread); sample weights decay as exp(-d^2 / kernel_width^2) with d
    the Euclidean distance from x. Coefficients of the weighted least-squares
    fit to the vote fraction are the scores; the intercept is reported as the
    baseline.
    """
    x = check_instance(x, forest.n_features)
    m = forest.n_features
    if n_samples < m + 1:
        raise ValueError("need at least n_features + 1 samples for the fit")
    if kernel_width is None:
        kernel_width = 0.75 * math.sqrt(m)
    std = np.asarray(feature_std, dtype=np.float64)
    rng = np.random.default_rng(seed)
    z = x + rng.standard_normal((n_samples, m)) * std
    y = vote_fraction_batch(forest, z)
    d2 = ((z - x) ** 2).sum(axis=1)
    w = np.exp(-d2 / kernel_width**2)

    design = np.hstack([np.ones((n_samples, 1)), z])
    sw = np.sqrt(w)[:, None]
    beta, _, rank, _ = np.linalg.lstsq(design * sw, y * sw[:, 0], rcond=None)
    if rank < m + 1:
        raise SingularFit(f"design rank {rank} < {m + 1}")
    phi = beta[1:]
    return AttributionResult(method="lime", phi=tuple(float(p) for p in phi),
                             baseline=float(beta[0]), ranking=_rank(phi))


def rank_stability(results: list, n: int, n_features: int) -> np.ndarray:
    """Per feature: fraction of points whose top-n ranking includes it."""
    if not 1 <= n <= n_features:
        raise ValueError("n out of range")
    hits = np.zeros(n_features)
    for res in results:
        for f in res.ranking[:n]:
            hits[f] += 1
    return hits / len(results)


def stability_curves(results: list, n_features: int) -> np.ndarray:
    """Matrix [feature, n-1] of rank_stability over n = 1..n_features."""
    curves = np.zeros((n_features, n_features))
    for n in range(1, n_features + 1):
        curves[:, n - 1] = rank_stability(results, n, n_features)
    return curves


def result_to_dict(result: AttributionResult) -> dict:
    return {
        "method": result.method,
        "phi": list(result.phi),
        "baseline": result.baseline,
        "ranking": list(result.ranking),
        "stderr": list(result.stderr) if result.stderr is not None else None,
    }
