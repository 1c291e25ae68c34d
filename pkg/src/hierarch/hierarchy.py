"""Class trees over base classes ``0..n-1``.

A leaf is a base class. An internal node is a superclass whose children are
kept in construction order. In a multiple-inheritance tree the same class may
label several leaves; in a single-inheritance tree every class labels at most
one leaf.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np


class TreeError(ValueError):
    pass


class EmptyListError(TreeError):
    pass


@dataclass(frozen=True)
class Leaf:
    class_id: int
    label: str = ""

    @property
    def children(self) -> tuple:
        return ()

    def leaf_set(self) -> frozenset[int]:
        return frozenset((self.class_id,))

    def leaves(self) -> Iterator["Leaf"]:
        yield self


@dataclass(frozen=True)
class Internal:
    children: tuple["ClassTree", ...]
    synthetic_id: int = -1
    _leaves: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        children = tuple(self.children)
        if not children:
            raise EmptyListError("an internal node needs at least one child")
        object.__setattr__(self, "children", children)
        object.__setattr__(self, "_leaves", frozenset().union(*(c.leaf_set() for c in children)))

    @property
    def label(self) -> str:
        return f"C{self.synthetic_id}"

    def leaf_set(self) -> frozenset[int]:
        return self._leaves

    def leaves(self) -> Iterator[Leaf]:
        for c in self.children:
            yield from c.leaves()


ClassTree = Union[Leaf, Internal]


def leaf_set(t: ClassTree) -> frozenset[int]:
    return t.leaf_set()


def leaf_multiset(t: ClassTree) -> tuple[int, ...]:
    return tuple(sorted(leaf.class_id for leaf in t.leaves()))


def overlaps(a: ClassTree, b: ClassTree) -> bool:
    return not a.leaf_set().isdisjoint(b.leaf_set())


def combine(trees: Sequence[ClassTree], synthetic_id: int = -1) -> Internal:
    """New internal node over ``trees`` in the order given.

    A single tree is accepted only to support wrapping a lone survivor at
    the very end of construction.
    """
    trees = tuple(trees)
    if not trees:
        raise EmptyListError("cannot combine an empty list of trees")
    return Internal(trees, synthetic_id)


def is_single_inheritance(t: ClassTree) -> bool:
    counts = Counter(leaf.class_id for leaf in t.leaves())
    return all(c == 1 for c in counts.values())


def canonical(t: ClassTree):
    """Order-insensitive form: ints for leaves, sorted tuples for internals.

    Children sort by their sorted leaf multiset, with the nested form as a
    tie-breaker so structurally different siblings still order stably.
    """
    if isinstance(t, Leaf):
        return t.class_id
    keyed = sorted(((leaf_multiset(c), repr(canonical(c))), canonical(c)) for c in t.children)
    return tuple(form for _, form in keyed)


def same_shape(a: ClassTree, b: ClassTree) -> bool:
    return canonical(a) == canonical(b)


def iter_nodes(t: ClassTree) -> Iterator[ClassTree]:
    yield t
    for c in t.children:
        yield from iter_nodes(c)


def depth(t: ClassTree) -> int:
    """Edges on the longest root-to-leaf path (a lone leaf has depth 0)."""
    if isinstance(t, Leaf):
        return 0
    return 1 + max(depth(c) for c in t.children)


def max_arity(t: ClassTree) -> int:
    return max((len(n.children) for n in iter_nodes(t)), default=0)


def internal_count(t: ClassTree) -> int:
    return sum(1 for n in iter_nodes(t) if isinstance(n, Internal))


def clusters(t: ClassTree) -> list[frozenset[int]]:
    """Leaf sets of all internal nodes, preorder."""
    return [n.leaf_set() for n in iter_nodes(t) if isinstance(n, Internal)]


@dataclass(frozen=True, eq=False)
class Forest:
    """Current set of trees together with their similarity matrix.

    ``groups[k]`` lists the previous-level tree indices that tree ``k`` was
    built from; it is ``None`` for the initial forest of leaves.
    """

    trees: tuple[ClassTree, ...]
    sim: object  # SimilarityMatrix; untyped to avoid a circular import
    groups: tuple[tuple[int, ...], ...] | None = None

    def __len__(self) -> int:
        return len(self.trees)

    @classmethod
    def of_leaves(cls, sim) -> "Forest":
        return cls(tuple(Leaf(i, lab) for i, lab in enumerate(sim.labels)), sim)


def leaves_from_labels(labels: Sequence[str]) -> list[Leaf]:
    return [Leaf(i, lab) for i, lab in enumerate(labels)]


def tree_distance_matrix(t: ClassTree, n: int) -> np.ndarray:
    """Path length in edges between the leaves of each pair of classes.

    Only defined for single-inheritance trees covering ``0..n-1``.
    """
    if not is_single_inheritance(t) or t.leaf_set() != frozenset(range(n)):
        raise TreeError("tree distances need a single-inheritance tree over all classes")
    paths: dict[int, tuple[int, ...]] = {}

    def walk(node, path):
        if isinstance(node, Leaf):
            paths[node.class_id] = path
        else:
            for k, c in enumerate(node.children):
                walk(c, path + (k,))

    walk(t, ())
    d = np.zeros((n, n), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = paths[i], paths[j]
            common = 0
            while common < min(len(a), len(b)) and a[common] == b[common]:
                common += 1
            d[i, j] = d[j, i] = len(a) + len(b) - 2 * common
    return d
