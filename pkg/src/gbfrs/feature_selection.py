"""Forward greedy attribute reduction driven by the weighted dependency.

Each round evaluates the dependency of the current subset extended by every
remaining attribute (at C = |subset|+1 under the default schedule), keeps the
maximizer, and accepts it only when it strictly improves on the running best
dependency. The significance of an added attribute links successive rounds
through the sqrt(C_i/C_{i+1}) rescaling of the dependency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .fuzzy_rough import SubsetDependencyEvaluator, make_subset
from .granular_ball import GranularBallSet

GAIN_EPSILON = 1e-9

MODE_BALL = "granular-ball"
MODE_CLASSIC = "classic-point"


@dataclass(frozen=True)
class SelectionTrace:
    """Ordered chosen attributes with per-step dependency and significance."""

    mode: str
    chosen: tuple[int, ...]
    dependency_path: tuple[float, ...]
    significance_path: tuple[float, ...]
    stopped_reason: str  # "no-gain" or "exhausted"
    round_best_significance: tuple[float, ...] = field(default=())
    purity_threshold: float | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "purity_threshold": self.purity_threshold,
            "seed": self.seed,
            "chosen": list(self.chosen),
            "dependency_path": list(self.dependency_path),
            "significance_path": list(self.significance_path),
            "round_best_significance": list(self.round_best_significance),
            "stopped_reason": self.stopped_reason,
        }


def _schedule_c(c_mode, subset_size: int) -> float:
    if c_mode == "schedule":
        return float(subset_size)
    return float(c_mode)


def significance(a: int, B, gbs: GranularBallSet, c_mode="schedule") -> float:
    """Dependency gain of adding attribute `a` to subset `B`.

    Under the schedule: W at C=|B|+1 for B+{a} minus sqrt(|B|/(|B|+1)) times
    W at C=|B| for B; this equals the plain difference of both subsets at
    C=|B|+1. An empty B gives the single-attribute dependency at C=1.
    With a fixed C the plain difference at that C is returned.
    """
    B = tuple(int(b) for b in B)
    a = int(a)
    if a in B:
        raise ValueError(f"attribute {a} already in the subset")
    evaluator = SubsetDependencyEvaluator.for_balls(gbs)
    extended = B + (a,)
    if c_mode == "schedule":
        w_ext = evaluator.dependency(extended, C=len(extended)).value
        if not B:
            return w_ext
        w_base = evaluator.dependency(B, C=len(B)).value
        return w_ext - math.sqrt(len(B) / len(extended)) * w_base
    c = float(c_mode)
    w_ext = evaluator.dependency(extended, C=c).value
    w_base = evaluator.dependency(B, C=c).value if B else 0.0
    return w_ext - w_base


def forward_select(gbs: GranularBallSet | None, ds: Dataset, mode: str = MODE_BALL,
                   c_mode="schedule", purity_threshold: float | None = None,
                   seed: int | None = None) -> SelectionTrace:
    """Greedy forward attribute selection over balls or raw points.

    Ties between equally good candidates go to the smallest attribute index.
    Stops when the best remaining candidate no longer strictly increases the
    running best dependency (epsilon 1e-9) or when all attributes are chosen.
    """
    if mode == MODE_BALL:
        if gbs is None:
            raise ValueError("granular-ball mode requires a ball set")
        evaluator = SubsetDependencyEvaluator.for_balls(gbs)
    elif mode == MODE_CLASSIC:
        evaluator = SubsetDependencyEvaluator.for_points(ds)
    else:
        raise ValueError(f"unknown selection mode {mode!r}")

    d = evaluator.d
    remaining = list(range(d))
    chosen: list[int] = []
    dependency_path: list[float] = []
    significance_path: list[float] = []
    round_best_sig: list[float] = []
    best = 0.0
    acc_sq = np.zeros((evaluator.m, evaluator.m))
    stopped = "exhausted"

    while remaining:
        c_round = _schedule_c(c_mode, len(chosen) + 1)
        best_attr = None
        best_val = -math.inf
        for a in remaining:
            val = evaluator.value_from_sq(acc_sq + evaluator.attr_sq_diff(a), c_round)
            if val > best_val:
                best_attr, best_val = a, val
        if chosen:
            if c_mode == "schedule":
                i = len(chosen)
                sig = best_val - math.sqrt(i / (i + 1)) * dependency_path[-1]
            else:
                sig = best_val - dependency_path[-1]
        else:
            sig = best_val
        round_best_sig.append(sig)

        if best_val > best + GAIN_EPSILON:
            chosen.append(best_attr)
            remaining.remove(best_attr)
            acc_sq += evaluator.attr_sq_diff(best_attr)
            best = best_val
            dependency_path.append(best_val)
            significance_path.append(sig)
        else:
            stopped = "no-gain"
            break

    return SelectionTrace(
        mode=mode,
        chosen=tuple(chosen),
        dependency_path=tuple(dependency_path),
        significance_path=tuple(significance_path),
        stopped_reason=stopped,
        round_best_significance=tuple(round_best_sig),
        purity_threshold=purity_threshold,
        seed=seed,
    )


def check_reduction(B, gbs: GranularBallSet, tol: float = 1e-9) -> bool:
    """True iff B is a reduct: no member is droppable and B matches the full set.

    Both conditions use the C = |subset| schedule; the comparison against the
    full attribute set rescales B's dependency to the full set's C. The
    dependency of the empty subset is taken as 0.
    """
    B = make_subset(B)
    evaluator = SubsetDependencyEvaluator.for_balls(gbs)
    d = evaluator.d
    full = tuple(range(d))

    w_b = evaluator.dependency(B, C=len(B)).value
    w_full = evaluator.dependency(full, C=d).value
    if abs(math.sqrt(len(B) / d) * w_b - w_full) > tol:
        return False

    for a in B:
        reduced = tuple(x for x in B if x != a)
        if reduced:
            w_red = evaluator.dependency(reduced, C=len(reduced)).value
        else:
            w_red = 0.0
        if not w_red < w_b - tol:
            return False
    return True
