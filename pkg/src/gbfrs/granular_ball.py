"""Granular-ball partition of a training set.

A ball is a cluster summarized by the mean of its members (center) and the
mean member distance to that center (radius), carrying the majority label and
its purity. Construction: an initial k-means partition into ceil(sqrt(n))
balls, recursive 2-means splitting of any ball below the purity threshold,
then removal of overlap between balls of different majority labels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset


@dataclass(frozen=True)
class GranularBall:
    """A set of sample indices with its center, radius, purity and label."""

    member_indices: np.ndarray
    center: np.ndarray
    radius: float
    purity: float
    majority_label: int

    def __post_init__(self):
        self.member_indices.flags.writeable = False
        self.center.flags.writeable = False

    @property
    def size(self) -> int:
        return self.member_indices.size

    def to_dict(self) -> dict:
        return {
            "members": [int(i) for i in self.member_indices],
            "center": [float(c) for c in self.center],
            "radius": float(self.radius),
            "purity": float(self.purity),
            "majority_label": int(self.majority_label),
        }


@dataclass(frozen=True)
class GranularBallSet:
    """A partition of the training indices into granular balls."""

    balls: tuple[GranularBall, ...]
    source_n: int
    purity_threshold: float
    truncated_radii: tuple[float, ...] | None = field(default=None)

    @property
    def m(self) -> int:
        return len(self.balls)

    def centers(self) -> np.ndarray:
        return np.stack([b.center for b in self.balls])

    def labels(self) -> np.ndarray:
        return np.array([b.majority_label for b in self.balls], dtype=int)

    def sizes(self) -> np.ndarray:
        return np.array([b.size for b in self.balls], dtype=int)

    def to_dict(self) -> dict:
        out = {
            "purity_threshold": float(self.purity_threshold),
            "source_n": int(self.source_n),
            "balls": [b.to_dict() for b in self.balls],
        }
        if self.truncated_radii is not None:
            out["truncated_radii"] = [float(r) for r in self.truncated_radii]
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(data: dict) -> "GranularBallSet":
        balls = tuple(
            GranularBall(
                np.array(b["members"], dtype=int),
                np.array(b["center"], dtype=float),
                float(b["radius"]),
                float(b["purity"]),
                int(b["majority_label"]),
            )
            for b in data["balls"]
        )
        truncated = data.get("truncated_radii")
        return GranularBallSet(
            balls,
            int(data["source_n"]),
            float(data["purity_threshold"]),
            tuple(truncated) if truncated is not None else None,
        )


def compute_center_radius(points) -> tuple[np.ndarray, float]:
    """Center = member mean, radius = mean Euclidean distance to the center."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[0] == 0:
        raise ValueError("empty point set")
    center = pts.mean(axis=0)
    radius = float(np.sqrt(((pts - center) ** 2).sum(axis=1)).mean())
    return center, radius


def purity_and_label(member_labels) -> tuple[float, int]:
    """Majority-class fraction and the majority label, ties to the smaller id."""
    labels = np.asarray(member_labels, dtype=int)
    if labels.size == 0:
        raise ValueError("empty ball")
    counts = np.bincount(labels)
    majority = int(counts.argmax())  # argmax returns the smallest id on ties
    return float(counts[majority] / labels.size), majority


def make_ball(ds: Dataset, indices) -> GranularBall:
    idx = np.sort(np.asarray(indices, dtype=int))
    pts = ds.features[idx]
    center, radius = compute_center_radius(pts)
    purity, majority = purity_and_label(ds.labels[idx])
    return GranularBall(idx, center, radius, purity, majority)


def is_splittable(ball: GranularBall, ds: Dataset) -> bool:
    """A ball can split when it has >= 2 members that are not all identical."""
    if ball.size < 2:
        return False
    pts = ds.features[ball.member_indices]
    return bool(np.any(pts != pts[0]))


def two_means_split(ball: GranularBall, ds: Dataset, seed=None) -> tuple[GranularBall, GranularBall]:
    """Split a ball in two by Lloyd 2-means over its member features.

    Seeding is deterministic: the two members farthest apart start as the
    centroids (the seed argument is accepted for interface stability but the
    split never consults an RNG). Both children are nonempty and partition
    the parent's member set; the child holding the smallest member index
    comes first.
    """
    if not is_splittable(ball, ds):
        raise ValueError("non-splittable ball")
    idx = ball.member_indices
    pts = ds.features[idx]

    # farthest pair; first occurrence in row-major order on ties
    norms = (pts**2).sum(axis=1)
    sq = norms[:, None] + norms[None, :] - 2.0 * (pts @ pts.T)
    i0, j0 = np.unravel_index(int(sq.argmax()), sq.shape)
    centroids = np.stack([pts[i0], pts[j0]])

    assign = _assign_nearest(pts, centroids)
    for _ in range(100):
        new_centroids = np.stack(
            [pts[assign == c].mean(axis=0) if np.any(assign == c) else centroids[c] for c in (0, 1)]
        )
        new_assign = _assign_nearest(pts, new_centroids)
        new_assign = _repair_empty_two(pts, new_centroids, new_assign)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        centroids = new_centroids

    left = idx[assign == 0]
    right = idx[assign == 1]
    if left.min() > right.min():
        left, right = right, left
    return make_ball(ds, left), make_ball(ds, right)


def _assign_nearest(pts: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid assignment; ties go to the lower centroid index."""
    d = ((pts[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d.argmin(axis=1)


def _repair_empty_two(pts, centroids, assign):
    """Keep both 2-means clusters nonempty by donating the farthest point."""
    for c in (0, 1):
        if not np.any(assign == c):
            other = 1 - c
            d = ((pts - centroids[other]) ** 2).sum(axis=1)
            d[assign != other] = -1.0
            assign = assign.copy()
            assign[int(d.argmax())] = c
    return assign


def _kmeans(X: np.ndarray, k: int, rng: np.random.Generator,
            max_iter: int = 100, tol: float = 1e-6) -> np.ndarray:
    """Lloyd k-means with k-means++ seeding; returns the assignment vector.

    Empty clusters are repaired by reassigning the farthest point of the
    largest cluster. Deterministic for a fixed rng state.
    """
    n = X.shape[0]
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    closest_sq = ((X - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest_sq.sum()
        if total > 0:
            probs = closest_sq / total
            pick = rng.choice(n, p=probs)
        else:
            pick = rng.integers(n)
        centroids[c] = X[pick]
        closest_sq = np.minimum(closest_sq, ((X - centroids[c]) ** 2).sum(axis=1))

    assign = _assign_nearest_k(X, centroids)
    assign = _repair_empty_k(X, centroids, assign, k)
    for _ in range(max_iter):
        new_centroids = np.stack(
            [X[assign == c].mean(axis=0) if np.any(assign == c) else centroids[c] for c in range(k)]
        )
        movement = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        new_assign = _assign_nearest_k(X, centroids)
        new_assign = _repair_empty_k(X, centroids, new_assign, k)
        if np.array_equal(new_assign, assign) or movement < tol:
            assign = new_assign
            break
        assign = new_assign
    return assign


def _assign_nearest_k(X, centroids):
    d = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d.argmin(axis=1)


def _repair_empty_k(X, centroids, assign, k):
    counts = np.bincount(assign, minlength=k)
    for c in range(k):
        if counts[c] == 0:
            donor = int(counts.argmax())
            d = ((X - centroids[donor]) ** 2).sum(axis=1)
            d[assign != donor] = -1.0
            moved = int(d.argmax())
            assign = assign.copy()
            assign[moved] = c
            counts[donor] -= 1
            counts[c] += 1
    return assign


def generate(ds: Dataset, purity_threshold: float, seed: int,
             initial_ball_count: int | None = None,
             singletons: bool = False) -> GranularBallSet:
    """Build the granular-ball partition of a normalized dataset.

    Starts from a k-means partition into ceil(sqrt(n)) balls (overridable),
    recursively 2-means-splits every splittable ball whose purity is below
    the threshold, then removes overlap between heterogeneous balls. With
    ``singletons=True`` every sample becomes its own ball (radius 0), the
    configuration under which ball-level and point-level dependencies agree.
    """
    if not 0.0 < purity_threshold <= 1.0:
        raise ValueError("purity must be in (0, 1]")

    if singletons:
        balls = tuple(make_ball(ds, [i]) for i in range(ds.n))
        return GranularBallSet(balls, ds.n, purity_threshold)

    k = initial_ball_count if initial_ball_count is not None else max(1, math.ceil(math.sqrt(ds.n)))
    k = min(k, ds.n)
    rng = np.random.default_rng(seed)
    assign = _kmeans(ds.features, k, rng)

    balls: list[GranularBall] = [
        make_ball(ds, np.flatnonzero(assign == c)) for c in range(k) if np.any(assign == c)
    ]
    _purity_split(balls, ds, purity_threshold)

    gbs = GranularBallSet(tuple(balls), ds.n, purity_threshold)
    return remove_heterogeneous_overlap(gbs, ds)


def _purity_split(balls: list[GranularBall], ds: Dataset, threshold: float) -> None:
    """Split every splittable ball below the purity threshold, in place."""
    i = 0
    while i < len(balls):
        ball = balls[i]
        if ball.purity < threshold and is_splittable(ball, ds):
            left, right = two_means_split(ball, ds)
            balls[i : i + 1] = [left, right]
        else:
            i += 1


def remove_heterogeneous_overlap(gbs: GranularBallSet, ds: Dataset, seed=None) -> GranularBallSet:
    """Split balls until no two with different labels overlap.

    Two balls overlap when their center distance is below the sum of their
    radii. Per offending pair the ball with lower purity is split (ties:
    larger radius, then smaller list index); a non-splittable preferred
    offender defers to the other ball. Children falling below the set's
    purity threshold are split further, keeping the purity invariant.
    Rounds are capped at 10x the entry ball count; any overlap still left
    then gets its radii truncated to half the center distance for reporting
    only (membership is never altered).
    """
    balls = list(gbs.balls)
    cap = 10 * max(1, len(balls))

    for _ in range(cap):
        offenders = _offending_pairs(balls)
        if not offenders:
            break
        to_split: list[int] = []
        for i, j in offenders:
            pick = _pick_offender(balls, ds, i, j)
            if pick is not None and pick not in to_split:
                to_split.append(pick)
        if not to_split:
            break
        # split from the back so earlier list positions stay valid
        for pos in sorted(to_split, reverse=True):
            left, right = two_means_split(balls[pos], ds)
            balls[pos : pos + 1] = [left, right]
        _purity_split(balls, ds, gbs.purity_threshold)

    truncated = None
    leftover = _offending_pairs(balls)
    if leftover:
        radii = [b.radius for b in balls]
        for i, j in leftover:
            half = 0.5 * float(np.linalg.norm(balls[i].center - balls[j].center))
            radii[i] = min(radii[i], half)
            radii[j] = min(radii[j], half)
        truncated = tuple(radii)

    return GranularBallSet(tuple(balls), gbs.source_n, gbs.purity_threshold, truncated)


def _offending_pairs(balls: list[GranularBall]) -> list[tuple[int, int]]:
    if len(balls) < 2:
        return []
    centers = np.stack([b.center for b in balls])
    radii = np.array([b.radius for b in balls])
    labels = np.array([b.majority_label for b in balls])
    norms = (centers**2).sum(axis=1)
    sq = np.maximum(norms[:, None] + norms[None, :] - 2.0 * (centers @ centers.T), 0.0)
    dist = np.sqrt(sq)
    bad = (dist < radii[:, None] + radii[None, :]) & (labels[:, None] != labels[None, :])
    ii, jj = np.nonzero(np.triu(bad, k=1))
    return list(zip(ii.tolist(), jj.tolist()))


def _pick_offender(balls, ds, i, j):
    """Order the pair by (purity asc, radius desc, index asc); first splittable."""
    key = lambda p: (balls[p].purity, -balls[p].radius, p)
    first, second = sorted((i, j), key=key)
    for cand in (first, second):
        if is_splittable(balls[cand], ds):
            return cand
    return None
