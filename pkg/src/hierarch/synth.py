"""Synthetic inputs: constant and island similarity matrices, planted hierarchies.

All randomness goes through ``numpy.random.Generator(PCG64(seed))`` so a seed
fully determines the output on every platform numpy supports.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hierarchy import ClassTree, Internal, Leaf, is_single_inheritance, tree_distance_matrix
from .matrix import ConfusionMatrix, SimilarityMatrix, default_labels


class InvalidPartition(ValueError):
    pass


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gen_constant(n: int, c: float, diag: float = 0.0) -> SimilarityMatrix:
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    s = np.full((n, n), float(c))
    np.fill_diagonal(s, diag)
    return SimilarityMatrix(s)


@dataclass(frozen=True)
class IslandSpec:
    blocks: tuple[tuple[int, ...], ...]
    low: float = 0.01
    high: float = 0.1
    seed: int = 0

    def __post_init__(self):
        blocks = tuple(tuple(sorted(int(i) for i in b)) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        if len(blocks) < 2:
            raise InvalidPartition("need at least two blocks")
        flat = [i for b in blocks for i in b]
        if any(not b for b in blocks):
            raise InvalidPartition("blocks must be non-empty")
        if sorted(flat) != list(range(len(flat))):
            raise InvalidPartition("blocks must partition 0..n-1 without repeats")
        if not 0 < self.low <= self.high <= 1:
            raise InvalidPartition("need 0 < low <= high <= 1")

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @classmethod
    def parse(cls, text: str, **kwargs) -> "IslandSpec":
        """``"0,1|2,3|4"`` -> blocks ``{0,1}``, ``{2,3}``, ``{4}``."""
        try:
            blocks = tuple(tuple(int(x) for x in part.split(",")) for part in text.split("|"))
        except ValueError:
            raise InvalidPartition(f"cannot parse island spec {text!r}") from None
        return cls(blocks, **kwargs)


def gen_islands(spec: IslandSpec) -> SimilarityMatrix:
    """Block matrix: zero across blocks, uniform random in ``[low, high]`` within.

    The diagonal holds what is left of each row, ``1 - sum(off-diagonal)``,
    clipped to ``[0, 1]``, so a singleton block gets a perfect 1.
    """
    rng = rng_for(spec.seed)
    n = spec.n
    s = np.zeros((n, n))
    for block in spec.blocks:
        for x, a in enumerate(block):
            for b in block[x + 1:]:
                s[a, b] = s[b, a] = rng.uniform(spec.low, spec.high)
    np.fill_diagonal(s, np.clip(1.0 - s.sum(axis=1), 0.0, 1.0))
    return SimilarityMatrix(s)


def balanced_tree(n_classes: int, arity: int = 2, labels: Sequence[str] | None = None) -> ClassTree:
    """Balanced ``arity``-ary tree over ``0..n_classes-1`` (contiguous leaves)."""
    labels = labels or default_labels(n_classes)
    next_id = n_classes

    def build(lo: int, hi: int) -> ClassTree:
        nonlocal next_id
        if hi - lo == 1:
            return Leaf(lo, labels[lo])
        k = min(arity, hi - lo)
        cuts = [lo + (hi - lo) * p // k for p in range(k + 1)]
        kids = tuple(build(cuts[p], cuts[p + 1]) for p in range(k))
        node = Internal(kids, next_id)
        next_id += 1
        return node

    return build(0, n_classes)


def halving_weight(distance: int) -> float:
    return 2.0 ** -distance


@dataclass(frozen=True)
class PlantedSpec:
    ground_truth: ClassTree
    noise: float = 0.1
    samples_per_class: int = 1000
    seed: int = 0
    weight: Callable[[int], float] = field(default=halving_weight, compare=False)

    def __post_init__(self):
        if not is_single_inheritance(self.ground_truth):
            raise ValueError("planted hierarchy must be a single-inheritance tree")
        if not 0 <= self.noise < 1:
            raise ValueError("noise must lie in [0, 1)")
        if self.samples_per_class < 1:
            raise ValueError("samples_per_class must be positive")


def gen_planted(spec: PlantedSpec) -> ConfusionMatrix:
    """Confusion counts whose errors decay with distance in the planted tree.

    Each row keeps ``samples - round(noise * samples)`` correct predictions
    and spreads the rest multinomially over the other classes with weight
    ``spec.weight(tree_distance)``.
    """
    n = len(spec.ground_truth.leaf_set())
    dist = tree_distance_matrix(spec.ground_truth, n)
    rng = rng_for(spec.seed)
    errors = int(round(spec.noise * spec.samples_per_class))
    counts = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        w = np.array([0.0 if j == i else spec.weight(int(dist[i, j])) for j in range(n)])
        counts[i] = rng.multinomial(errors, w / w.sum())
        counts[i, i] = spec.samples_per_class - errors
    labels = [leaf.label or str(leaf.class_id)
              for leaf in sorted(spec.ground_truth.leaves(), key=lambda lf: lf.class_id)]
    return ConfusionMatrix(tuple(labels), counts)


def random_row_stochastic(n: int, rng: np.random.Generator) -> np.ndarray:
    """Rows drawn uniformly from the probability simplex (Dirichlet(1, ..., 1))."""
    return rng.dirichlet(np.ones(n), size=n)


# Reference six-class example: {0,1} and {0,5} are close, {2,3,4} a tight triple.
_REFERENCE_PAIRS = {(0, 1): 0.10, (0, 5): 0.09, (1, 5): 0.01,
                    (3, 4): 0.11, (2, 3): 0.105, (2, 4): 0.10}


def reference_similarity() -> SimilarityMatrix:
    s = np.full((6, 6), 0.005)
    np.fill_diagonal(s, 0.80)
    for (i, j), v in _REFERENCE_PAIRS.items():
        s[i, j] = s[j, i] = v
    return SimilarityMatrix(s)


def reference_counts(per_class: int = 1000) -> ConfusionMatrix:
    """Symmetric counts with ``per_class`` samples per row.

    Off-diagonal rates equal the reference similarities exactly; only the
    diagonal differs from :func:`reference_similarity`.
    """
    off = reference_similarity().s.copy()
    np.fill_diagonal(off, 0.0)
    counts = np.rint(off * per_class).astype(np.int64)
    np.fill_diagonal(counts, per_class - counts.sum(axis=1))
    return ConfusionMatrix(default_labels(6), counts)
