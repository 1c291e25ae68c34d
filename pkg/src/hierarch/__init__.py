"""Class hierarchies derived from a classifier's confusion matrix."""

__version__ = "0.1.0"

from .engine import HierarchyConfig, build_hierarchy, trace_hierarchy
from .hierarchy import Internal, Leaf, canonical, is_single_inheritance, leaf_set
from .matrix import ConfusionMatrix, SimilarityMatrix, normalize, similarity

__all__ = [
    "ConfusionMatrix", "SimilarityMatrix", "normalize", "similarity",
    "HierarchyConfig", "build_hierarchy", "trace_hierarchy",
    "Leaf", "Internal", "canonical", "is_single_inheritance", "leaf_set",
]
