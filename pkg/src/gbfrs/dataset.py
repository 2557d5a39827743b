"""Labeled tabular data: loading, min-max normalization, noise injection, folds.

All operations are pure functions of their inputs (plus an explicit seed) and
return new Dataset values; feature/label arrays are marked read-only so a
Dataset can be shared freely across threads.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Raised for malformed or unusable input data."""


@dataclass(frozen=True)
class ColumnStats:
    """Per-column min/max recorded by normalization, reused on test folds."""

    col_min: np.ndarray
    col_max: np.ndarray

    def __post_init__(self):
        self.col_min.flags.writeable = False
        self.col_max.flags.writeable = False


@dataclass(frozen=True)
class Dataset:
    """An n x d feature matrix with integer class labels in [0, class_count).

    Labels are remapped to contiguous integers in first-appearance order at
    load time; `label_names` keeps the original identifiers in that order.
    `norm_stats` is set once `normalize_min_max` has run and carries the
    statistics needed to normalize held-out data consistently.
    """

    features: np.ndarray
    labels: np.ndarray
    attribute_names: tuple[str, ...]
    class_count: int
    label_names: tuple[str, ...]
    norm_stats: ColumnStats | None = field(default=None)

    def __post_init__(self):
        if self.features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise DataError("empty dataset")
        if self.labels.shape != (n,):
            raise DataError("labels must be a length-n vector")
        if len(self.attribute_names) != d:
            raise DataError("attribute_names must have one entry per column")
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.class_count):
            raise DataError("labels must lie in [0, class_count)")
        self.features.flags.writeable = False
        self.labels.flags.writeable = False

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @staticmethod
    def from_arrays(features, labels, attribute_names=None, label_names=None) -> "Dataset":
        """Build a Dataset from array-likes, copying and validating them."""
        feats = np.array(features, dtype=float)
        labs = np.array(labels, dtype=int)
        if not np.all(np.isfinite(feats)):
            raise DataError("non-numeric feature (NaN or infinite value)")
        if attribute_names is None:
            attribute_names = tuple(f"a{j}" for j in range(feats.shape[1]))
        l = int(labs.max()) + 1 if labs.size else 0
        if label_names is None:
            label_names = tuple(str(c) for c in range(l))
        return Dataset(feats, labs, tuple(attribute_names), l, tuple(label_names))

    def take(self, indices) -> "Dataset":
        """Row subset (used to carve folds); keeps the global label mapping."""
        idx = np.asarray(indices, dtype=int)
        return Dataset(
            self.features[idx].copy(),
            self.labels[idx].copy(),
            self.attribute_names,
            self.class_count,
            self.label_names,
            self.norm_stats,
        )


@dataclass(frozen=True)
class FoldSplit:
    """k disjoint index sets covering [0, n), sizes differing by at most 1."""

    folds: tuple[np.ndarray, ...]

    def train_test(self, fold_index: int) -> tuple[np.ndarray, np.ndarray]:
        test = self.folds[fold_index]
        train = np.concatenate([f for i, f in enumerate(self.folds) if i != fold_index])
        return np.sort(train), np.sort(test)


def load_csv(path, label_column, header: bool = True) -> Dataset:
    """Load a comma-separated file into a Dataset.

    `label_column` is a header name or a zero-based column index. Labels are
    mapped to contiguous integers in first-appearance order. Every row must
    have the same arity and every feature cell must parse as a real number.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing file: {path}")
    with path.open("r", encoding="utf-8", newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise DataError("empty dataset")

    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DataError("empty dataset")
    else:
        names = [f"a{j}" for j in range(len(rows[0]))]

    arity = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != arity:
            raise DataError(f"row {i} has {len(row)} cells, expected {arity}")

    if isinstance(label_column, int) or (isinstance(label_column, str) and label_column.lstrip("-").isdigit()):
        label_idx = int(label_column)
        if not 0 <= label_idx < arity:
            raise DataError(f"label column index {label_idx} out of range")
    else:
        if label_column not in names:
            raise DataError(f"label column {label_column!r} not found in header")
        label_idx = names.index(label_column)

    feature_cols = [j for j in range(arity) if j != label_idx]
    if not feature_cols:
        raise DataError("no feature columns besides the label")

    feats = np.empty((len(rows), len(feature_cols)), dtype=float)
    raw_labels = []
    for i, row in enumerate(rows):
        for out_j, j in enumerate(feature_cols):
            cell = row[j].strip()
            if cell == "":
                raise DataError(f"missing value at row {i}, column {names[j]!r}")
            try:
                feats[i, out_j] = float(cell)
            except ValueError:
                raise DataError(f"non-numeric feature {cell!r} at row {i}, column {names[j]!r}") from None
        raw_labels.append(row[label_idx].strip())

    mapping: dict[str, int] = {}
    labels = np.empty(len(raw_labels), dtype=int)
    for i, lab in enumerate(raw_labels):
        if lab not in mapping:
            mapping[lab] = len(mapping)
        labels[i] = mapping[lab]

    if len(rows) == 1:
        warnings.warn("dataset has a single row", stacklevel=2)

    return Dataset(
        feats,
        labels,
        tuple(names[j] for j in feature_cols),
        len(mapping),
        tuple(mapping.keys()),
    )


def normalize_min_max(ds: Dataset, stats: ColumnStats | None = None) -> Dataset:
    """Map each column to [0,1] via x -> (x - min) / (max - min).

    Constant columns map to all zeros. When `stats` is given (train-fold
    statistics), they are applied instead of the dataset's own and the result
    is clipped to [0,1]; this is how test folds must be normalized.
    """
    if stats is None:
        col_min = ds.features.min(axis=0)
        col_max = ds.features.max(axis=0)
        stats = ColumnStats(col_min, col_max)
        clip = False
    else:
        col_min, col_max = stats.col_min, stats.col_max
        clip = True

    span = col_max - col_min
    safe = np.where(span > 0, span, 1.0)
    normed = (ds.features - col_min) / safe
    normed[:, span == 0] = 0.0
    if clip:
        np.clip(normed, 0.0, 1.0, out=normed)
    return Dataset(
        normed,
        ds.labels.copy(),
        ds.attribute_names,
        ds.class_count,
        ds.label_names,
        stats,
    )


def inject_label_noise(ds: Dataset, rate: float, seed: int) -> Dataset:
    """Flip exactly floor(rate * n) labels, each to a different random class.

    Indices are drawn uniformly without replacement; deterministic per seed.
    """
    if not 0.0 <= rate <= 1.0:
        raise DataError("label noise rate must be in [0, 1]")
    flip_count = int(rate * ds.n)
    if flip_count == 0:
        return ds
    if ds.class_count < 2:
        raise DataError("cannot flip single-class labels")

    rng = np.random.default_rng(seed)
    flip_idx = rng.choice(ds.n, size=flip_count, replace=False)
    labels = ds.labels.copy()
    # draw from the other l-1 classes, skipping over the original label
    draws = rng.integers(0, ds.class_count - 1, size=flip_count)
    for pos, i in enumerate(flip_idx):
        r = draws[pos]
        labels[i] = r if r < ds.labels[i] else r + 1
    return Dataset(
        ds.features.copy(), labels, ds.attribute_names, ds.class_count, ds.label_names, ds.norm_stats
    )


def inject_attribute_noise(ds: Dataset, rate: float, seed: int) -> Dataset:
    """Perturb every cell by uniform noise in [-rate, +rate], clipped to [0,1].

    Requires normalized features; deterministic per seed.
    """
    if rate < 0:
        raise DataError("attribute noise rate must be nonnegative")
    if rate == 0:
        return ds
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-rate, rate, size=ds.features.shape)
    feats = np.clip(ds.features + noise, 0.0, 1.0)
    return Dataset(
        feats, ds.labels.copy(), ds.attribute_names, ds.class_count, ds.label_names, ds.norm_stats
    )


def kfold_split(ds: Dataset, k: int, seed: int, stratified: bool = True) -> FoldSplit:
    """Deterministic k-fold partition of [0, n); stratified by label by default.

    Stratification deals each class's shuffled members to the currently
    smallest folds, keeping both overall fold sizes and per-fold class counts
    within one sample of even.
    """
    if k < 2:
        raise DataError("k must be at least 2")
    if k > ds.n:
        raise DataError(f"k={k} exceeds sample count n={ds.n}")

    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]

    if not stratified:
        perm = rng.permutation(ds.n)
        for pos, i in enumerate(perm):
            folds[pos % k].append(int(i))
    else:
        for c in range(ds.class_count):
            members = np.flatnonzero(ds.labels == c)
            members = members[rng.permutation(members.size)]
            base, rem = divmod(members.size, k)
            # folds ordered by (current size, index): extras go to the smallest
            order = sorted(range(k), key=lambda f: (len(folds[f]), f))
            cursor = 0
            for rank, f in enumerate(order):
                count = base + (1 if rank < rem else 0)
                folds[f].extend(int(i) for i in members[cursor : cursor + count])
                cursor += count

    arrays = tuple(np.array(sorted(f), dtype=int) for f in folds)
    return FoldSplit(arrays)
