"""Per-point explanation reports and cohort summaries.

Splits a test set into misclassified and correctly classified cohorts,
collects every counterfactual's signed percent changes per feature, and emits
raw samples plus fixed one-percentage-point histograms over [-100, 100] so
any plotting tool can redraw the distribution comparisons. Output field order
is stable; golden-file tests rely on it.
"""

from __future__ import annotations

import csv
import json
import math

import numpy as np

from .attribution import AttributionResult, result_to_dict as attribution_to_dict
from .counterfactual import CounterfactualResult, result_to_dict as cf_to_dict
from .data import Dataset
from .forest import Forest, predict_batch

HIST_LO = -100.0
HIST_HI = 100.0
HIST_BINS = 200  # one percentage point per bin


def _histogram(samples: list) -> list:
    counts = [0] * HIST_BINS
    for s in samples:
        idx = int(math.floor(s)) - int(HIST_LO)
        counts[min(max(idx, 0), HIST_BINS - 1)] += 1
    return counts


def _cohort_summary(name: str, point_indices: list, cf_results: list,
                    n_features: int, feature_names) -> dict:
    per_feature: list[list] = [[] for _ in range(n_features)]
    for i in point_indices:
        for change in cf_results[i].changes:
            per_feature[change.feature_index].append(change.percent_change_of_range)
    total = sum(len(s) for s in per_feature)
    return {
        "cohort": name,
        "n_points": len(point_indices),
        "total_changes": total,
        "features": [
            {
                "feature_index": f,
                "name": feature_names[f],
                "n_samples": len(samples),
                "percent_changes": samples,
                "histogram": _histogram(samples),
            }
            for f, samples in enumerate(per_feature)
        ],
    }


def build_report(forest: Forest, test: Dataset, cf_results: list,
                 attributions: list | None = None) -> dict:
    """Assemble the full report document for a test set.

    cf_results must hold one CounterfactualResult per test row, in row order;
    attributions, when given, likewise.
    """
    n = test.n_samples
    if len(cf_results) != n:
        raise ValueError("need one counterfactual result per test point")
    if attributions is not None and len(attributions) != n:
        raise ValueError("need one attribution result per test point")

    predictions = predict_batch(forest, test.features)
    correct_mask = predictions == test.labels
    accuracy = float(correct_mask.mean())
    mis_idx = [i for i in range(n) if not correct_mask[i]]
    cor_idx = [i for i in range(n) if correct_mask[i]]

    warnings = []
    if not mis_idx:
        warnings.append("CohortEmpty: no misclassified test points")
    if not cor_idx:
        warnings.append("CohortEmpty: no correctly classified test points")

    points = []
    for i in range(n):
        record = {
            "index": i,
            "prediction": int(predictions[i]),
            "true_label": int(test.labels[i]),
            "correct": bool(correct_mask[i]),
            "counterfactual": cf_to_dict(cf_results[i]),
        }
        if attributions is not None:
            record["attribution"] = attribution_to_dict(attributions[i])
        points.append(record)

    return {
        "n_test_points": n,
        "accuracy": accuracy,
        "warnings": warnings,
        "points": points,
        "cohorts": {
            "misclassified": _cohort_summary("misclassified", mis_idx, cf_results,
                                             test.n_features, test.feature_names),
            "correct": _cohort_summary("correct", cor_idx, cf_results,
                                       test.n_features, test.feature_names),
        },
    }


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def write_samples_csv(report: dict, path) -> None:
    """Raw percent-change samples, one row per (cohort, point, change)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["cohort", "point_index", "feature_index", "feature_name",
                         "percent_change_of_range"])
        for point in report["points"]:
            cohort = "correct" if point["correct"] else "misclassified"
            for change in point["counterfactual"]["changes"]:
                writer.writerow([cohort, point["index"], change["feature_index"],
                                 change["name"], repr(change["percent_change_of_range"])])
