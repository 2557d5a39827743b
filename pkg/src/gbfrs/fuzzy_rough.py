"""Ball-level fuzzy similarity, approximations and the weighted dependency.

The similarity of two balls under an attribute subset B is
1 - (1/sqrt(C)) * d_B(c_i, c_j) with d_B the Euclidean distance between the
ball centers restricted to B's coordinates. The lower approximation of a
ball for a decision class is the scaled distance to the nearest ball of a
different majority label; the per-ball positive region is each ball's lower
approximation for its own class; the weighted dependency averages those
values weighted by ball sizes over the original sample count.

The point-level analogue (`classic_dependency`) treats every sample as its
own unit and serves both as the equivalence oracle for singleton balls and
as the noise-robustness baseline.

C defaults to |B| everywhere, which keeps all values in [0,1] on normalized
data; a caller may fix C explicitly instead (the monotonicity properties
assume a fixed C).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .granular_ball import GranularBallSet

AttributeSubset = tuple[int, ...]


def make_subset(indices, d: int | None = None) -> AttributeSubset:
    """Validate an attribute subset: nonempty, no duplicates, in range."""
    subset = tuple(int(i) for i in indices)
    if not subset:
        raise ValueError("attribute subset must be nonempty")
    if len(set(subset)) != len(subset):
        raise ValueError("attribute subset contains duplicates")
    if d is not None and any(not 0 <= i < d for i in subset):
        raise ValueError("attribute index out of range")
    return subset


@dataclass(frozen=True)
class DependencyResult:
    """Weighted dependency of the decision on an attribute subset."""

    value: float
    per_ball: np.ndarray
    C: float
    subset: AttributeSubset

    def __post_init__(self):
        self.per_ball.flags.writeable = False

    @property
    def value_unweighted(self) -> float:
        """Plain mean of the per-ball positive region (|U'| denominator)."""
        return float(self.per_ball.mean())

    def to_dict(self) -> dict:
        return {
            "value": float(self.value),
            "value_unweighted": self.value_unweighted,
            "C": float(self.C),
            "subset": list(self.subset),
            "per_ball": [float(v) for v in self.per_ball],
        }


def _resolve_c(C, subset) -> float:
    c = float(len(subset)) if C is None else float(C)
    if c <= 0:
        raise ValueError("distance parameter C must be positive")
    return c


def _subset_sq_dists(values: np.ndarray, subset) -> np.ndarray:
    """Pairwise squared Euclidean distances over the subset's coordinates."""
    m = values.shape[0]
    acc = np.zeros((m, m))
    for k in subset:
        col = values[:, k]
        diff = col[:, None] - col[None, :]
        acc += diff * diff
    return acc


def _positive_region_from_sq(sq: np.ndarray, labels: np.ndarray, C: float) -> np.ndarray:
    """Per-unit lower approximation of its own class from squared distances."""
    hetero = labels[:, None] != labels[None, :]
    masked = np.where(hetero, sq, np.inf)
    mins = masked.min(axis=0)
    per = np.where(np.isfinite(mins), np.sqrt(np.maximum(mins, 0.0)) / math.sqrt(C), 1.0)
    return per


def ball_similarity(gb_i, gb_j, subset, C=None) -> float:
    """Fuzzy similarity 1 - (1/sqrt(C)) * d_B(c_i, c_j); reflexive, symmetric."""
    subset = make_subset(subset)
    c = _resolve_c(C, subset)
    sel = list(subset)
    delta = float(np.linalg.norm(gb_i.center[sel] - gb_j.center[sel]))
    return 1.0 - delta / math.sqrt(c)


def lower_approximation(gbs: GranularBallSet, j: int, target_class: int, subset, C=None) -> float:
    """Scaled distance from ball j to the nearest ball outside target_class.

    If no ball of a different class exists (single-class universe) the value
    is 1.0: nothing contradicts full membership.
    """
    subset = make_subset(subset)
    c = _resolve_c(C, subset)
    sel = list(subset)
    c_j = gbs.balls[j].center[sel]
    best = None
    for ball in gbs.balls:
        if ball.majority_label != target_class:
            d = float(np.linalg.norm(ball.center[sel] - c_j))
            if best is None or d < best:
                best = d
    if best is None:
        return 1.0
    return best / math.sqrt(c)


def upper_approximation(gbs: GranularBallSet, j: int, target_class: int, subset, C=None) -> float:
    """Maximal similarity of ball j to any ball of target_class; 0.0 if none."""
    subset = make_subset(subset)
    c = _resolve_c(C, subset)
    sel = list(subset)
    c_j = gbs.balls[j].center[sel]
    best = None
    for ball in gbs.balls:
        if ball.majority_label == target_class:
            s = 1.0 - float(np.linalg.norm(ball.center[sel] - c_j)) / math.sqrt(c)
            if best is None or s > best:
                best = s
    return 0.0 if best is None else best


def positive_region(gbs: GranularBallSet, subset, C=None) -> np.ndarray:
    """Per-ball lower approximation of each ball's own majority class.

    Equal to the max over all classes of the per-ball lower approximation,
    because a ball's lower approximation for any foreign class is exactly 0
    (the ball itself is at distance 0 from itself).
    """
    subset = make_subset(subset)
    c = _resolve_c(C, subset)
    sq = _subset_sq_dists(gbs.centers(), subset)
    return _positive_region_from_sq(sq, gbs.labels(), c)


def weighted_dependency(gbs: GranularBallSet, subset, C=None) -> DependencyResult:
    """Size-weighted mean of the positive region over the source sample count."""
    subset = make_subset(subset)
    c = _resolve_c(C, subset)
    per = positive_region(gbs, subset, c)
    value = float(np.dot(gbs.sizes().astype(float), per) / gbs.source_n)
    return DependencyResult(value, per, c, subset)


def classic_dependency(ds: Dataset, subset, C=None) -> DependencyResult:
    """Point-level dependency: per-sample nearest different-label distance.

    The per-sample values play the role of per-ball entries (unit weights);
    the dependency is their mean.
    """
    subset = make_subset(subset)
    c = _resolve_c(C, subset)
    sq = _subset_sq_dists(ds.features, subset)
    per = _positive_region_from_sq(sq, ds.labels, c)
    value = float(np.dot(np.ones(ds.n), per) / ds.n)
    return DependencyResult(value, per, c, subset)


def rescale_dependency(result: DependencyResult, C_new: float) -> DependencyResult:
    """Move a dependency to another C: multiply by sqrt(C_old / C_new)."""
    if C_new <= 0:
        raise ValueError("distance parameter C must be positive")
    factor = math.sqrt(result.C / C_new)
    return DependencyResult(
        result.value * factor, result.per_ball * factor, float(C_new), result.subset
    )


class SubsetDependencyEvaluator:
    """Dependency evaluation over one universe of units (balls or points).

    Holds the unit centers, labels, sizes and the source sample count, and
    supports the incremental pattern used by forward selection: keep the
    accumulated squared-distance matrix of the current subset and extend it
    by one attribute at a time. Results are identical (to float rounding) to
    the direct per-subset computation.
    """

    def __init__(self, centers: np.ndarray, labels: np.ndarray, sizes: np.ndarray, source_n: int):
        self.centers = np.asarray(centers, dtype=float)
        self.labels = np.asarray(labels, dtype=int)
        self.sizes = np.asarray(sizes, dtype=float)
        self.source_n = int(source_n)
        self.m = self.centers.shape[0]
        self.d = self.centers.shape[1]
        self._hetero = self.labels[:, None] != self.labels[None, :]

    @staticmethod
    def for_balls(gbs: GranularBallSet) -> "SubsetDependencyEvaluator":
        return SubsetDependencyEvaluator(gbs.centers(), gbs.labels(), gbs.sizes(), gbs.source_n)

    @staticmethod
    def for_points(ds: Dataset) -> "SubsetDependencyEvaluator":
        return SubsetDependencyEvaluator(ds.features, ds.labels, np.ones(ds.n), ds.n)

    def attr_sq_diff(self, attr: int) -> np.ndarray:
        col = self.centers[:, attr]
        diff = col[:, None] - col[None, :]
        return diff * diff

    def value_from_sq(self, sq: np.ndarray, C: float) -> float:
        masked = np.where(self._hetero, sq, np.inf)
        mins = masked.min(axis=0)
        per = np.where(np.isfinite(mins), np.sqrt(np.maximum(mins, 0.0)) / math.sqrt(C), 1.0)
        return float(np.dot(self.sizes, per) / self.source_n)

    def dependency(self, subset, C=None) -> DependencyResult:
        subset = make_subset(subset, self.d)
        c = _resolve_c(C, subset)
        sq = _subset_sq_dists(self.centers, subset)
        masked = np.where(self._hetero, sq, np.inf)
        mins = masked.min(axis=0)
        per = np.where(np.isfinite(mins), np.sqrt(np.maximum(mins, 0.0)) / math.sqrt(c), 1.0)
        value = float(np.dot(self.sizes, per) / self.source_n)
        return DependencyResult(value, per, c, subset)
