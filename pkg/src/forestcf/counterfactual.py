"""Minimal-distance counterfactual search.

Starting from a query point, grow a per-feature neighborhood box by one
percent per round until its CNF encoding admits a prediction flip, then read
the satisfying assignment back into concrete feature moves. The reported
changes are exactly the thresholds that must be crossed; untouched features
keep their original values bit for bit.

Boxes with identical clamp profiles produce identical formulas, so the loop
only re-solves when growth actually frees a new threshold; skipped rounds
still count toward the iteration total and the returned delta.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .encoding import (
    ForestEncoder,
    ThresholdMap,
    decode_assignment,
    extract_thresholds,
    make_box,
)
from .forest import Forest, check_instance, predict_forest
from .sat import BudgetExhausted, solve

log = logging.getLogger(__name__)

SolverBudget = BudgetExhausted  # engine-facing alias; never mistaken for UNSAT


class Unreachable(RuntimeError):
    """No flip exists within max_delta (the loop's termination bound)."""

    def __init__(self, last_delta: float):
        super().__init__(f"no counterfactual within the delta limit (last tried {last_delta:.6g})")
        self.last_delta = last_delta


@dataclass(frozen=True)
class CounterfactualQuery:
    instance: tuple
    delta0: float = 0.01
    growth: float = 1.01
    frozen_features: frozenset = field(default_factory=frozenset)
    epsilon_fraction: float = 1e-6
    max_delta: float = 1.0
    clip_to_ranges: bool = True
    max_conflicts: int = 1_000_000

    def validate(self) -> None:
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if not self.growth > 1:
            raise ValueError("growth must exceed 1")
        if not 0 < self.epsilon_fraction < 1:
            raise ValueError("epsilon_fraction must be in (0, 1)")
        if self.max_delta < self.delta0:
            raise ValueError("max_delta must be at least delta0")


@dataclass(frozen=True)
class FeatureChange:
    feature_index: int
    name: str
    original_value: float
    new_value: float
    crossed_thresholds: tuple
    percent_change_of_range: float


@dataclass(frozen=True)
class CounterfactualResult:
    original_class: int
    new_class: int
    final_delta: float
    iterations: int
    changes: tuple
    counterexample: tuple


def percent_change(original: float, new: float, range_width: float) -> float:
    """Signed move as a percentage of the feature's training range."""
    if range_width <= 0:
        raise ZeroRange("feature has zero range")
    return 100.0 * (new - original) / range_width


class ZeroRange(ValueError):
    pass


def concretize(intervals: list, original, tmap: ThresholdMap,
               epsilon_fraction: float, range_widths) -> np.ndarray:
    """Pick one concrete point inside the decoded intervals.

    Features whose interval contains the original keep it unchanged; the rest
    move just past the nearest interval boundary, stepping epsilon * range
    inside. If the step overshoots the interval (degenerate width) the
    midpoint is used instead.
    """
    out = np.array(original, dtype=np.float64)
    for f, iv in enumerate(intervals):
        x = out[f]
        if iv.contains(x):
            continue
        eps = epsilon_fraction * range_widths[f]
        if x <= iv.lo:
            candidate = iv.lo + eps if iv.lo_open else iv.lo
        else:
            candidate = iv.hi - eps
        if not iv.contains(candidate):
            log.debug("degenerate interval on feature %d, using midpoint", f)
            candidate = (iv.lo + iv.hi) / 2.0
        out[f] = candidate
    return out


def crossed_thresholds(original: float, new: float, thresholds) -> tuple:
    """Thresholds whose comparison outcome differs between the two values."""
    return tuple(t for t in thresholds if (original <= t) != (new <= t))


def find_min_counterfactual(forest: Forest, query: CounterfactualQuery,
                            tmap: ThresholdMap | None = None) -> CounterfactualResult:
    """Grow delta multiplicatively until the encoding is satisfiable, then
    decode, concretize and report the flip."""
    query.validate()
    if forest.n_classes != 2:
        raise ValueError("counterfactual search supports binary forests")
    x = check_instance(query.instance, forest.n_features)
    if tmap is None:
        tmap = extract_thresholds(forest)
    original_class = predict_forest(forest, x)
    encoder = ForestEncoder(forest, tmap, forbidden_class=original_class)

    frozen = frozenset(query.frozen_features)
    for f in frozen:
        if not 0 <= f < forest.n_features:
            raise ValueError(f"frozen feature index {f} out of range")

    delta = query.delta0
    iterations = 0
    prev_profile = None
    prev_sat = None
    while True:
        box = make_box(x, delta, forest, frozen=frozen, clip=query.clip_to_ranges)
        iterations += 1
        profile = encoder.clamp_profile(box)
        if profile == prev_profile:
            res = prev_sat  # identical formula, identical (deterministic) answer
        else:
            formula = encoder.encode_box(box)
            res = solve(formula, max_conflicts=query.max_conflicts)
            prev_profile, prev_sat = profile, res
        if res.sat:
            # reuse of a previous answer only ever repeats an UNSAT round, so
            # a SAT exit always owns a freshly built formula
            break
        delta *= query.growth
        if delta > query.max_delta * (1 + 1e-12):
            raise Unreachable(delta / query.growth)

    intervals = decode_assignment(formula, res.assignment, tmap, box)
    counterexample = concretize(intervals, x, tmap, query.epsilon_fraction,
                                forest.range_widths)
    new_class = predict_forest(forest, counterexample)
    if new_class == original_class:
        raise RuntimeError("internal error: counterexample failed to flip the prediction")

    changes = []
    for f, iv in enumerate(intervals):
        if iv.contains(x[f]):
            continue
        width = forest.range_widths[f]
        changes.append(FeatureChange(
            feature_index=f,
            name=forest.feature_names[f],
            original_value=float(x[f]),
            new_value=float(counterexample[f]),
            crossed_thresholds=crossed_thresholds(x[f], counterexample[f],
                                                  tmap.per_feature[f]),
            percent_change_of_range=percent_change(x[f], counterexample[f], width),
        ))
    return CounterfactualResult(
        original_class=original_class,
        new_class=new_class,
        final_delta=delta,
        iterations=iterations,
        changes=tuple(changes),
        counterexample=tuple(float(v) for v in counterexample),
    )


def result_to_dict(result: CounterfactualResult) -> dict:
    """JSON-ready form; field order is shared by the CLI and the service."""
    return {
        "original_class": result.original_class,
        "new_class": result.new_class,
        "final_delta": result.final_delta,
        "iterations": result.iterations,
        "changes": [
            {
                "feature_index": c.feature_index,
                "name": c.name,
                "original_value": c.original_value,
                "new_value": c.new_value,
                "crossed_thresholds": list(c.crossed_thresholds),
                "percent_change_of_range": c.percent_change_of_range,
            }
            for c in result.changes
        ],
        "counterexample": list(result.counterexample),
    }
