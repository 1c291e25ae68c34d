"""Agreement between two class hierarchies over the same classes."""
from __future__ import annotations

from itertools import combinations

from .hierarchy import ClassTree, clusters, same_shape


class ClassSetMismatch(ValueError):
    pass


def _pair_signature(cl: list[frozenset[int]], i: int, j: int) -> frozenset:
    # innermost clusters holding both classes; one cluster (the LCA) in a SIT
    holding = [c for c in cl if i in c and j in c]
    return frozenset(c for c in holding if not any(o < c for o in holding))


def tree_similarity(a: ClassTree, b: ClassTree) -> float:
    """Fraction of class pairs grouped by the same innermost cluster in both trees.

    For single-inheritance trees the innermost cluster of a pair is the leaf
    set of its lowest common ancestor, so the score is 1 exactly when the
    trees agree up to child order. This is a proxy for "closeness" with no
    further statistical meaning.
    """
    classes = a.leaf_set()
    if classes != b.leaf_set():
        raise ClassSetMismatch(
            f"trees cover different classes: {sorted(classes ^ b.leaf_set())} differ")
    pairs = list(combinations(sorted(classes), 2))
    if not pairs:
        return 1.0
    ca, cb = clusters(a), clusters(b)
    agree = sum(_pair_signature(ca, i, j) == _pair_signature(cb, i, j) for i, j in pairs)
    return agree / len(pairs)


def compare(a: ClassTree, b: ClassTree) -> dict:
    return {"similarity": tree_similarity(a, b), "canonical_equal": same_shape(a, b)}
