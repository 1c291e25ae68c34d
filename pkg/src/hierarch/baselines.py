"""Distance-based baselines: prediction-profile distances plus classic HAC.

Both distances compare rows of the confusion matrix, i.e. how a classifier
spreads its predictions for two true classes. The dendrogram is a plain
bottom-up binary merge of the closest pair of clusters.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hierarchy import ClassTree, Internal, Leaf
from .matrix import ConfusionMatrix, MatrixError, default_labels, normalize

LINKAGES = ("average", "complete")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    d: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        d = np.array(self.d, dtype=float, copy=True)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise MatrixError(f"distance matrix must be square, got shape {d.shape}")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise MatrixError("distances must be finite and non-negative")
        if not np.array_equal(d, d.T) or np.any(np.diag(d) != 0):
            raise MatrixError("distance matrix must be symmetric with a zero diagonal")
        d.flags.writeable = False
        object.__setattr__(self, "d", d)
        if not self.labels:
            object.__setattr__(self, "labels", default_labels(d.shape[0]))

    @property
    def n(self) -> int:
        return self.d.shape[0]


def _profiles(cm: ConfusionMatrix, rates: bool) -> np.ndarray:
    return normalize(cm).rates if rates else cm.counts.astype(float)


def _pairwise(x: np.ndarray, metric) -> np.ndarray:
    n = x.shape[0]
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = metric(x[i] - x[j])
    return d


def euclidean_distance(cm: ConfusionMatrix, rates: bool = False) -> DistanceMatrix:
    """Euclidean distance between confusion-matrix rows (raw counts by default)."""
    x = _profiles(cm, rates)
    return DistanceMatrix(_pairwise(x, lambda v: float(np.sqrt(np.dot(v, v)))), cm.labels)


def l1_distance(cm: ConfusionMatrix, rates: bool = False) -> DistanceMatrix:
    x = _profiles(cm, rates)
    return DistanceMatrix(_pairwise(x, lambda v: float(np.abs(v).sum())), cm.labels)


def similarity_to_distance(s) -> DistanceMatrix:
    """``1 - s`` off the diagonal, 0 on it."""
    d = 1.0 - np.asarray(s.s, dtype=float)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d, s.labels)


def agglomerate(d: DistanceMatrix, labels: Sequence[str] | None = None,
                linkage: str = "average") -> ClassTree:
    """Binary dendrogram by repeatedly merging the two closest clusters.

    Cluster distance is the mean (``average``) or maximum (``complete``) of
    the member distances. The merged cluster takes the slot of the lower
    index; ties go to the lowest ``(a, b)`` slot pair.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    labels = tuple(labels) if labels is not None else d.labels
    n = d.n
    reduce = np.mean if linkage == "average" else np.max
    nodes: list[ClassTree] = [Leaf(i, labels[i]) for i in range(n)]
    members: list[list[int]] = [[i] for i in range(n)]
    next_id = n
    while len(nodes) > 1:
        best = None
        for a in range(len(nodes)):
            for b in range(a + 1, len(nodes)):
                dist = float(reduce(d.d[np.ix_(members[a], members[b])]))
                if best is None or dist < best[0]:
                    best = (dist, a, b)
        _, a, b = best
        nodes[a] = Internal((nodes[a], nodes[b]), next_id)
        members[a] = members[a] + members[b]
        next_id += 1
        del nodes[b], members[b]
    return nodes[0]
