"""Granular-ball fuzzy rough set feature selection.

Partitions a labeled dataset into purity-constrained granular balls, scores
attribute subsets with a size-weighted fuzzy dependency over ball centers,
selects attributes by forward greedy search, and benchmarks the result
against a classical point-based fuzzy rough baseline under label and
attribute noise.
"""

__version__ = "0.1.0"

from .dataset import (
    ColumnStats,
    DataError,
    Dataset,
    FoldSplit,
    inject_attribute_noise,
    inject_label_noise,
    kfold_split,
    load_csv,
    normalize_min_max,
)
from .feature_selection import SelectionTrace, check_reduction, forward_select, significance
from .fuzzy_rough import (
    DependencyResult,
    ball_similarity,
    classic_dependency,
    lower_approximation,
    positive_region,
    rescale_dependency,
    upper_approximation,
    weighted_dependency,
)
from .granular_ball import (
    GranularBall,
    GranularBallSet,
    compute_center_radius,
    generate,
    purity_and_label,
    remove_heterogeneous_overlap,
    two_means_split,
)

__all__ = [
    "ColumnStats",
    "DataError",
    "Dataset",
    "DependencyResult",
    "FoldSplit",
    "GranularBall",
    "GranularBallSet",
    "SelectionTrace",
    "ball_similarity",
    "check_reduction",
    "classic_dependency",
    "compute_center_radius",
    "forward_select",
    "generate",
    "inject_attribute_noise",
    "inject_label_noise",
    "kfold_split",
    "load_csv",
    "lower_approximation",
    "normalize_min_max",
    "positive_region",
    "purity_and_label",
    "remove_heterogeneous_overlap",
    "rescale_dependency",
    "significance",
    "two_means_split",
    "upper_approximation",
    "weighted_dependency",
]
