"""Cross-validated kNN benchmark of selected subsets under injected noise.

Protocol per cell (method x noise level): split, inject noise into the
training folds only, normalize the test fold with clean-train statistics,
run the method's selection on the noisy train, classify the clean test with
kNN over the selected attributes. The granular-ball method grid-searches its
purity threshold by an inner 3-fold CV on the training fold, so no test
information ever reaches threshold choice, ball generation or selection.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field

import numpy as np

from . import granular_ball
from .dataset import (
    Dataset,
    inject_attribute_noise,
    inject_label_noise,
    kfold_split,
    normalize_min_max,
)
from .feature_selection import MODE_BALL, MODE_CLASSIC, forward_select

METHOD_GBFRS = "gbfrs"
METHOD_CLASSIC = "classic-frs"
METHOD_ALL = "all-features"
METHODS = (METHOD_GBFRS, METHOD_CLASSIC, METHOD_ALL)

DEFAULT_PURITY_GRID = tuple(round(0.60 + 0.05 * i, 2) for i in range(9))
DEFAULT_NOISE_LEVELS = tuple(round(0.05 * i, 2) for i in range(7))

NOISE_LABEL = "label"
NOISE_ATTRIBUTE = "attribute"


@dataclass(frozen=True)
class ExperimentConfig:
    purity_grid: tuple[float, ...] = DEFAULT_PURITY_GRID
    noise_levels: tuple[float, ...] = DEFAULT_NOISE_LEVELS
    folds: int = 5
    knn_k: int = 3
    seeds: tuple[int, ...] = (0,)
    methods: tuple[str, ...] = METHODS
    noise_kind: str = NOISE_LABEL
    stratified: bool = True
    c_mode: object = "schedule"
    inner_folds: int = 3

    def __post_init__(self):
        if self.folds < 2:
            raise ValueError("folds must be at least 2")
        for t in self.purity_grid:
            if not 0.0 < t <= 1.0:
                raise ValueError("purity grid values must be in (0, 1]")
        for lvl in self.noise_levels:
            if not 0.0 <= lvl < 1.0:
                raise ValueError("noise levels must be in [0, 1)")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.noise_kind not in (NOISE_LABEL, NOISE_ATTRIBUTE):
            raise ValueError(f"unknown noise kind {self.noise_kind!r}")

    def to_dict(self) -> dict:
        return {
            "purity_grid": list(self.purity_grid),
            "noise_levels": list(self.noise_levels),
            "folds": self.folds,
            "knn_k": self.knn_k,
            "seeds": list(self.seeds),
            "methods": list(self.methods),
            "noise_kind": self.noise_kind,
            "stratified": self.stratified,
            "c_mode": self.c_mode if isinstance(self.c_mode, str) else float(self.c_mode),
            "inner_folds": self.inner_folds,
        }


@dataclass
class CellStats:
    """Aggregated results of one (method, noise level) grid cell."""

    method: str
    noise: float
    accuracies: list[float] = field(default_factory=list)
    subset_sizes: list[int] = field(default_factory=list)
    chosen_ts: list[float] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracies))

    @property
    def mean_subset_size(self) -> float:
        return float(np.mean(self.subset_sizes))

    def to_dict(self, include_timing: bool = True) -> dict:
        out = {
            "method": self.method,
            "noise": self.noise,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_subset_size": self.mean_subset_size,
            "fold_count": len(self.accuracies),
            "accuracies": [float(a) for a in self.accuracies],
            "subset_sizes": [int(s) for s in self.subset_sizes],
            "chosen_purity": (float(np.mean(self.chosen_ts)) if self.chosen_ts else None),
            "chosen_purity_values": [float(t) for t in self.chosen_ts],
        }
        if include_timing:
            out["seconds"] = float(self.seconds)
        return out


@dataclass
class EvaluationReport:
    cells: list[CellStats]
    config: ExperimentConfig
    dataset_fingerprint: str

    def cell(self, method: str, noise: float) -> CellStats:
        for c in self.cells:
            if c.method == method and c.noise == noise:
                return c
        raise KeyError((method, noise))

    def to_dict(self, include_timing: bool = True) -> dict:
        ordered = sorted(self.cells, key=lambda c: (c.method, c.noise))
        return {
            "config": self.config.to_dict(),
            "dataset_fingerprint": self.dataset_fingerprint,
            "cells": [c.to_dict(include_timing) for c in ordered],
        }

    def csv_rows(self, include_timing: bool = True) -> list[list]:
        header = [
            "method", "noise", "mean_accuracy", "std_accuracy",
            "mean_subset_size", "fold_count", "chosen_purity",
        ]
        if include_timing:
            header.append("seconds")
        rows = [header]
        for c in sorted(self.cells, key=lambda c: (c.method, c.noise)):
            row = [
                c.method,
                f"{c.noise:.4f}",
                f"{c.mean_accuracy:.6f}",
                f"{c.std_accuracy:.6f}",
                f"{c.mean_subset_size:.4f}",
                str(len(c.accuracies)),
                f"{np.mean(c.chosen_ts):.4f}" if c.chosen_ts else "",
            ]
            if include_timing:
                row.append(f"{c.seconds:.3f}")
            rows.append(row)
        return rows


def knn_predict(train: Dataset, test: Dataset, subset, k: int) -> np.ndarray:
    """Majority vote among the k nearest training samples over the subset.

    Distance ties resolve to the smaller training index, vote ties to the
    smallest class id.
    """
    if k > train.n:
        raise ValueError(f"k={k} exceeds training size {train.n}")
    sel = list(subset)
    sq = np.zeros((test.n, train.n))
    for a in sel:
        diff = test.features[:, a][:, None] - train.features[:, a][None, :]
        sq += diff * diff
    preds = np.empty(test.n, dtype=int)
    for i in range(test.n):
        order = np.argsort(sq[i], kind="stable")[:k]
        votes = np.bincount(train.labels[order], minlength=train.class_count)
        preds[i] = int(votes.argmax())
    return preds


def _cell_seed_sequence(master_seed: int, dataset_fp: str, method: str, noise: float) -> np.random.SeedSequence:
    fp_int = int.from_bytes(hashlib.sha256(dataset_fp.encode()).digest()[:8], "big") if dataset_fp else 0
    method_idx = METHODS.index(method)
    return np.random.SeedSequence([int(master_seed), fp_int, method_idx, int(round(noise * 1000))])


def _inject(train: Dataset, noise: float, kind: str, seed: int) -> Dataset:
    if noise == 0:
        return train
    if kind == NOISE_LABEL:
        return inject_label_noise(train, noise, seed)
    return inject_attribute_noise(train, noise, seed)


def purity_grid_search(ds_train: Dataset, grid, seed: int, knn_k: int = 3,
                       inner_folds: int = 3, c_mode="schedule"):
    """Pick the purity threshold maximizing inner-CV kNN accuracy.

    Runs ball generation + selection per inner training fold for every grid
    value; ties go to the larger threshold (coarser balls). Returns the
    chosen threshold and the per-threshold mean accuracies.
    """
    grid = tuple(grid)
    if not grid:
        raise ValueError("purity grid must be nonempty")
    if len(grid) == 1:
        return grid[0], {grid[0]: None}

    rng = np.random.default_rng(seed)
    split_seed = int(rng.integers(2**32))
    gen_seed = int(rng.integers(2**32))
    inner_k = min(inner_folds, ds_train.n)
    fold = kfold_split(ds_train, inner_k, split_seed)

    scores: dict[float, float] = {}
    for t in grid:
        accs = []
        for f in range(inner_k):
            tr_idx, te_idx = fold.train_test(f)
            inner_train = ds_train.take(tr_idx)
            inner_test = ds_train.take(te_idx)
            gbs = granular_ball.generate(inner_train, t, gen_seed)
            trace = forward_select(gbs, inner_train, MODE_BALL, c_mode=c_mode)
            subset = trace.chosen if trace.chosen else tuple(range(inner_train.d))
            k = min(knn_k, inner_train.n)
            preds = knn_predict(inner_train, inner_test, subset, k)
            accs.append(float(np.mean(preds == inner_test.labels)))
        scores[t] = float(np.mean(accs))

    best_t = max(grid, key=lambda t: (scores[t], t))
    return best_t, scores


def _select_for_method(train: Dataset, method: str, cfg: ExperimentConfig,
                       rng: np.random.Generator):
    """Run a method's attribute selection on a training fold.

    Returns (subset, chosen purity threshold or None).
    """
    if method == METHOD_ALL:
        return tuple(range(train.d)), None
    if method == METHOD_CLASSIC:
        trace = forward_select(None, train, MODE_CLASSIC, c_mode=cfg.c_mode)
        subset = trace.chosen if trace.chosen else tuple(range(train.d))
        return subset, None

    grid_seed = int(rng.integers(2**32))
    gen_seed = int(rng.integers(2**32))
    best_t, _ = purity_grid_search(
        train, cfg.purity_grid, grid_seed, cfg.knn_k, cfg.inner_folds, cfg.c_mode
    )
    gbs = granular_ball.generate(train, best_t, gen_seed)
    trace = forward_select(gbs, train, MODE_BALL, c_mode=cfg.c_mode)
    subset = trace.chosen if trace.chosen else tuple(range(train.d))
    return subset, best_t


def cross_validate(ds: Dataset, cfg: ExperimentConfig, method: str, noise: float,
                   seed: int, dataset_fp: str = "") -> CellStats:
    """One full k-fold pass of a method at one noise level.

    Training folds are normalized (stats recorded), then noise-injected;
    test folds stay clean and are normalized with the clean train statistics.
    """
    cell = CellStats(method=method, noise=noise)
    seq = _cell_seed_sequence(seed, dataset_fp, method, noise)
    fold_seqs = seq.spawn(cfg.folds + 1)
    split_seed = int(np.random.default_rng(fold_seqs[0]).integers(2**32))
    folds = kfold_split(ds, cfg.folds, split_seed, cfg.stratified)

    start = time.perf_counter()
    for f in range(cfg.folds):
        rng = np.random.default_rng(fold_seqs[f + 1])
        noise_seed = int(rng.integers(2**32))
        tr_idx, te_idx = folds.train_test(f)
        train = normalize_min_max(ds.take(tr_idx))
        test = normalize_min_max(ds.take(te_idx), stats=train.norm_stats)
        train_noisy = _inject(train, noise, cfg.noise_kind, noise_seed)

        subset, chosen_t = _select_for_method(train_noisy, method, cfg, rng)
        k = min(cfg.knn_k, train_noisy.n)
        preds = knn_predict(train_noisy, test, subset, k)
        cell.accuracies.append(float(np.mean(preds == test.labels)))
        cell.subset_sizes.append(len(subset))
        if chosen_t is not None:
            cell.chosen_ts.append(chosen_t)
    cell.seconds = time.perf_counter() - start
    return cell


def noise_sweep(ds: Dataset, cfg: ExperimentConfig, dataset_fp: str = "") -> EvaluationReport:
    """Full methods x noise-levels grid, fold results pooled across seeds."""
    cells: list[CellStats] = []
    for method in cfg.methods:
        for noise in cfg.noise_levels:
            merged = CellStats(method=method, noise=noise)
            for seed in cfg.seeds:
                part = cross_validate(ds, cfg, method, noise, seed, dataset_fp)
                merged.accuracies.extend(part.accuracies)
                merged.subset_sizes.extend(part.subset_sizes)
                merged.chosen_ts.extend(part.chosen_ts)
                merged.seconds += part.seconds
            cells.append(merged)
    return EvaluationReport(cells, cfg, dataset_fp)
