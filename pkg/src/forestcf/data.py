"""CSV ingestion, standardization and the train/test split.

Loads any numeric CSV with a header row and one label column. Standardization
removes the per-column mean and scales by the population standard deviation;
the split fits those parameters on the training partition only and applies
them to both sides.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .rng import SplitMix64, mix64


class DataError(ValueError):
    pass


class MissingFile(DataError):
    pass


class UnknownLabelColumn(DataError):
    pass


class RaggedRow(DataError):
    def __init__(self, row: int):
        super().__init__(f"row {row} has the wrong number of cells")
        self.row = row


class NonNumericCell(DataError):
    """Cell (row, col) did not parse as a finite real. Indices are 0-based,
    rows counted over data rows (header excluded), columns in file order."""

    def __init__(self, row: int, col: int):
        super().__init__(f"cell ({row}, {col}) is not a finite number")
        self.row = row
        self.col = col


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray          # (n_samples, n_features) float64
    labels: np.ndarray            # (n_samples,) int64
    feature_names: tuple
    label_names: tuple            # class index -> original label text
    standardization: tuple | None  # per-feature (mean, std); None while raw
    row_ids: np.ndarray           # identity of each row in the source file

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.label_names)


def load_csv(path, label_column: str) -> Dataset:
    """Read a header CSV into a raw Dataset.

    Label values may be arbitrary text; they are mapped to contiguous integers
    in order of first appearance. All other cells must parse as finite reals.
    """
    if not os.path.isfile(path):
        raise MissingFile(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("file has no header row") from None
        if label_column not in header:
            raise UnknownLabelColumn(f"label column {label_column!r} not in header")
        label_idx = header.index(label_column)
        feature_names = tuple(name for i, name in enumerate(header) if i != label_idx)

        rows: list[list[float]] = []
        labels: list[int] = []
        label_map: dict[str, int] = {}
        for r, cells in enumerate(reader):
            if len(cells) != len(header):
                raise RaggedRow(r)
            values = []
            for c, cell in enumerate(cells):
                if c == label_idx:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    raise NonNumericCell(r, c) from None
                if not math.isfinite(v):
                    raise NonNumericCell(r, c)
                values.append(v)
            raw_label = cells[label_idx]
            if raw_label not in label_map:
                label_map[raw_label] = len(label_map)
            labels.append(label_map[raw_label])
            rows.append(values)

    if not rows:
        raise DataError("file has no data rows")
    return Dataset(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        feature_names=feature_names,
        label_names=tuple(label_map),
        standardization=None,
        row_ids=np.arange(len(rows)),
    )


def fit_standardization(features: np.ndarray) -> tuple:
    """Per-column (mean, population std); constant columns get std 0."""
    means = features.mean(axis=0)
    stds = features.std(axis=0, ddof=0)
    return tuple((float(m), float(s)) for m, s in zip(means, stds))


def apply_standardization(d: Dataset, params: tuple) -> Dataset:
    """Transform columns to (v - mean) / std; constant columns map to zero."""
    means = np.array([m for m, _ in params])
    stds = np.array([s for _, s in params])
    safe = np.where(stds == 0.0, 1.0, stds)
    transformed = (d.features - means) / safe
    transformed[:, stds == 0.0] = 0.0
    return replace(d, features=transformed, standardization=params)


def standardize(d: Dataset) -> Dataset:
    """Standardize a raw dataset against its own column moments."""
    if d.standardization is not None:
        raise DataError("dataset is already standardized")
    return apply_standardization(d, fit_standardization(d.features))


def inverse_standardize(d: Dataset) -> Dataset:
    """Undo standardize; constant columns recover their original mean."""
    if d.standardization is None:
        raise DataError("dataset is not standardized")
    means = np.array([m for m, _ in d.standardization])
    stds = np.array([s for _, s in d.standardization])
    raw = d.features * stds + means
    return replace(d, features=raw, standardization=None)


def split(d: Dataset, fraction: float, seed: int) -> tuple:
    """Shuffle deterministically, cut off ceil(fraction * n) rows for training,
    then standardize both partitions with parameters fitted on train only."""
    if not 0.0 < fraction < 1.0:
        raise DataError("fraction must be strictly between 0 and 1")
    if d.standardization is not None:
        raise DataError("split expects a raw dataset")
    n = d.n_samples
    order = list(range(n))
    SplitMix64(mix64(seed)).shuffle(order)
    n_train = math.ceil(fraction * n)
    train_idx = np.array(order[:n_train], dtype=np.int64)
    test_idx = np.array(order[n_train:], dtype=np.int64)

    def take(idx: np.ndarray) -> Dataset:
        return replace(d, features=d.features[idx], labels=d.labels[idx],
                       row_ids=d.row_ids[idx])

    train = take(train_idx)
    params = fit_standardization(train.features)
    return apply_standardization(train, params), apply_standardization(take(test_idx), params)


def feature_ranges_of(d: Dataset) -> tuple:
    """Per-feature (min, max) over this dataset (use the training partition)."""
    lo = d.features.min(axis=0)
    hi = d.features.max(axis=0)
    return tuple((float(a), float(b)) for a, b in zip(lo, hi))


def summarize(d: Dataset) -> dict:
    """JSON-ready overview used by the CLI."""
    return {
        "n_samples": d.n_samples,
        "n_features": d.n_features,
        "n_classes": d.n_classes,
        "feature_names": list(d.feature_names),
        "label_names": list(d.label_names),
        "standardized": d.standardization is not None,
        "class_counts": np.bincount(d.labels, minlength=d.n_classes).tolist(),
        "feature_stats": [
            {
                "name": name,
                "min": float(col.min()),
                "max": float(col.max()),
                "mean": float(col.mean()),
                "std": float(col.std(ddof=0)),
            }
            for name, col in zip(d.feature_names, d.features.T)
        ],
    }


def save_csv(d: Dataset, path, label_column: str = "label",
             as_class_indices: bool = False) -> None:
    """Write a dataset back out (values as-is).

    With as_class_indices the label column holds the integer class index
    instead of the original text. Split exports use this so that a reader
    can recover the model's class order from the file alone; first-appearance
    mapping would otherwise depend on which class the shuffle put first.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(d.feature_names) + [label_column])
        for row, label in zip(d.features, d.labels):
            text = str(int(label)) if as_class_indices else d.label_names[label]
            writer.writerow([repr(float(v)) for v in row] + [text])


def relabel_to_class_indices(d: Dataset) -> Dataset:
    """Reinterpret integer label names as model class indices.

    Exported split CSVs write class indices as the label text; after
    load_csv's first-appearance mapping the dataset's label_names are then a
    permutation of "0".."k-1", and this undoes the permutation. Datasets with
    any non-integer label name pass through unchanged.
    """
    try:
        mapping = [int(name) for name in d.label_names]
    except ValueError:
        return d
    if sorted(mapping) != list(range(len(mapping))):
        return d
    lookup = np.array(mapping, dtype=np.int64)
    return replace(d, labels=lookup[d.labels],
                   label_names=tuple(str(i) for i in range(len(mapping))))
