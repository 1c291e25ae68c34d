"""Iterative similarity-merge construction of class hierarchies.

Each round finds every pair of current trees whose similarity is within
``delta`` of the best similarity either of them has to anything else, groups
those pairs into fully connected merge graphs, combines each graph into a new
superclass and recomputes similarities by average linkage. ``delta`` is the
threshold ratio times the largest similarity between non-overlapping trees.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .hierarchy import ClassTree, Forest, Internal, Leaf, combine, iter_nodes
from .matrix import SimilarityMatrix, max_offdiag_nonoverlap

Pair = Tuple[int, int, float]
PairList = List[Pair]
PairAdjacency = Dict[int, List[int]]
MergeGraphs = List[List[int]]


class InvariantError(RuntimeError):
    """The engine reached a state its own guarantees rule out."""


@dataclass(frozen=True)
class HierarchyConfig:
    ratio: float = 0.1
    single_inheritance: bool = True
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.ratio >= 0:
            raise ValueError(f"ratio must be >= 0, got {self.ratio}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")

    @property
    def mode(self) -> str:
        return "sit" if self.single_inheritance else "mit"


@dataclass(frozen=True)
class MergePlan:
    """What one round decided: threshold, qualifying pairs and merge graphs."""

    m: float
    delta: float
    pairs: PairList
    graphs: MergeGraphs
    trees_before: int
    trees_after: int
    fallback: bool = False


@dataclass(frozen=True)
class HierarchyResult:
    tree: ClassTree
    steps: List[MergePlan] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.steps)


def _offdiag_row_max(s: np.ndarray) -> np.ndarray:
    off = np.array(s, dtype=float, copy=True)
    np.fill_diagonal(off, -np.inf)
    return off.max(axis=1)


def find_all_pairs(s: SimilarityMatrix, delta: float,
                   cfg: HierarchyConfig | None = None) -> PairList:
    """Pairs ``(i, j, s_ij)``, ``i < j``, that satisfy the merge condition.

    Sorted by similarity descending, then ``(i, j)`` ascending.
    """
    eps = cfg.epsilon if cfg is not None else 0.0
    a = s.s
    n = a.shape[0]
    if n < 2:
        return []
    row_max = _offdiag_row_max(a)
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            sij = float(a[i, j])
            if sij > 0 and sij + delta + eps >= max(row_max[i], row_max[j]):
                pairs.append((i, j, sij))
    pairs.sort(key=lambda p: (-p[2], p[0], p[1]))
    return pairs


def get_dict(p: Sequence[Pair], n: int) -> PairAdjacency:
    d: PairAdjacency = {i: [] for i in range(n)}
    for i, j, *_ in p:
        d[i].append(j)
        d[j].append(i)
    for i in d:
        d[i].sort()
    return d


def get_intersection(g: Sequence[int], d: PairAdjacency) -> List[int]:
    """Indices adjacent to every member of ``g`` (members excluded), ascending."""
    common = set(d[g[0]])
    for k in g[1:]:
        common &= set(d[k])
    return sorted(common.difference(g))


def maximal_cliques_containing(i: int, d: PairAdjacency) -> MergeGraphs:
    """All maximal cliques of the pair graph that contain ``i``.

    Bron-Kerbosch with pivoting, seeded at ``{i}``. Cliques come back as
    sorted lists in lexicographic order, which is the order a depth-first
    extension with ascending candidates would first discover them.
    """
    adj = {k: set(v) for k, v in d.items()}
    found: MergeGraphs = []

    def expand(r: set, p: set, x: set):
        if not p and not x:
            found.append(sorted(r))
            return
        pivot = max(sorted(p | x), key=lambda u: len(p & adj[u]))
        for v in sorted(p - adj[pivot]):
            expand(r | {v}, p & adj[v], x & adj[v])
            p = p - {v}
            x = x | {v}

    expand({i}, set(adj[i]), set())
    found.sort()
    return found


def _drop_subsets(graphs: MergeGraphs) -> MergeGraphs:
    sets = [frozenset(g) for g in graphs]
    return [g for g, sg in zip(graphs, sets) if not any(sg < other for other in sets)]


def _sit_graphs(s: np.ndarray, p: PairList, n: int) -> MergeGraphs:
    remaining = list(p)
    graphs: MergeGraphs = []
    while remaining:
        d = get_dict(remaining, n)
        i, j, _ = remaining[0]
        g = [i, j]
        inter = get_intersection(g, d)
        while inter:
            # highest mean similarity to the current group, lowest index on ties
            k = max(inter, key=lambda c: (sum(float(s[c, x]) for x in g) / len(g), -c))
            g.append(k)
            inter = get_intersection(g, d)
        members = set(g)
        remaining = [q for q in remaining if q[0] not in members and q[1] not in members]
        graphs.append(sorted(g))
    return graphs


def _mit_graphs(p: PairList, n: int) -> MergeGraphs:
    remaining = list(p)
    free = [True] * n
    graphs: MergeGraphs = []
    for i in range(n):
        d = get_dict(remaining, n)
        for g in maximal_cliques_containing(i, d):
            if len(g) > 1 or free[i]:
                graphs.append(g)
            for j in g:
                free[j] = False
        remaining = [q for q in remaining if i != q[0] and i != q[1]]
        for j in list(d[i]):
            d[j].remove(i)
            if set(d[j]) <= set(d[i]):
                remaining = [q for q in remaining if j != q[0] and j != q[1]]
    # free singletons mark untouched trees; they never merge, so they are not reported
    return [g for g in _drop_subsets(graphs) if len(g) > 1]


def pairs_to_graphs(s: SimilarityMatrix, p: PairList,
                    cfg: HierarchyConfig | None = None) -> MergeGraphs:
    """Turn qualifying pairs into the groups of trees to merge this round.

    Single inheritance grows disjoint cliques greedily from the strongest
    remaining pair. Multiple inheritance collects maximal cliques seed by
    seed, so a tree may land in several groups.
    """
    cfg = cfg or HierarchyConfig()
    if not p:
        return []
    if cfg.single_inheritance:
        return _sit_graphs(s.s, p, s.n)
    return _mit_graphs(p, s.n)


def _next_id(trees: Sequence[ClassTree]) -> int:
    top = 0
    for t in trees:
        for node in iter_nodes(t):
            ident = node.class_id if isinstance(node, Leaf) else node.synthetic_id
            top = max(top, ident + 1)
    return top


def similarity_update(f: Forest, prev: SimilarityMatrix) -> SimilarityMatrix:
    """Average-linkage similarities between the trees of ``f``.

    Entry ``(a, b)`` is the mean of ``prev`` over the block formed by the
    previous-level index groups of trees ``a`` and ``b``, diagonal included.
    """
    groups = f.groups if f.groups is not None else tuple((k,) for k in range(len(f.trees)))
    k = len(groups)
    out = np.empty((k, k), dtype=float)
    src = prev.s
    for a in range(k):
        rows = list(groups[a])
        for b in range(a, k):
            out[a, b] = out[b, a] = float(src[np.ix_(rows, list(groups[b]))].mean())
    return SimilarityMatrix(out)


def _merge_step(f: Forest, delta: float, cfg: HierarchyConfig, m: float = float("nan")):
    pairs = find_all_pairs(f.sim, delta, cfg)
    graphs = [g for g in pairs_to_graphs(f.sim, pairs, cfg) if len(g) > 1]
    fallback = False
    if not cfg.single_inheritance and graphs:
        covered = len(set().union(*graphs))
        if len(graphs) >= covered:
            # overlapping cliques would not shrink the forest; group disjointly
            graphs = _sit_graphs(f.sim.s, pairs, f.sim.n)
            fallback = True
    next_id = _next_id(f.trees)
    trees: list = []
    groups: list = []
    used = [False] * len(f.trees)
    for g in graphs:
        trees.append(combine([f.trees[k] for k in g], next_id))
        groups.append(tuple(g))
        next_id += 1
        for k in g:
            used[k] = True
    for k, t in enumerate(f.trees):
        if not used[k]:
            trees.append(t)
            groups.append((k,))
    staged = Forest(tuple(trees), f.sim, tuple(groups))
    new = Forest(staged.trees, similarity_update(staged, f.sim), staged.groups)
    plan = MergePlan(m, delta, pairs, graphs, len(f.trees), len(new.trees), fallback)
    return new, plan


def merge(f: Forest, delta: float, cfg: HierarchyConfig | None = None) -> Forest:
    """One round: combine each merge graph into a new tree.

    New trees come first, in graph order; untouched trees follow in their
    original order. The returned forest carries the updated similarities.
    """
    return _merge_step(f, delta, cfg or HierarchyConfig())[0]


def _can_merge(forest: Forest, m: float, cfg: HierarchyConfig) -> bool:
    if len(forest) < 2:
        return False
    if m > 0 or cfg.single_inheritance:
        return m > 0
    # only overlapping trees remain similar; they still merge, with delta = 0
    return bool(_offdiag_row_max(forest.sim.s).max() > 0)


def trace_hierarchy(s: SimilarityMatrix, cfg: HierarchyConfig | None = None) -> HierarchyResult:
    """Run the construction loop, keeping a :class:`MergePlan` per round."""
    cfg = cfg or HierarchyConfig()
    forest = Forest.of_leaves(s)
    steps: List[MergePlan] = []
    m = max_offdiag_nonoverlap(forest.sim, forest)
    while _can_merge(forest, m, cfg):
        forest, plan = _merge_step(forest, cfg.ratio * m, cfg, m)
        if plan.trees_after >= plan.trees_before:
            raise InvariantError(f"round {len(steps) + 1} did not shrink the forest (m={m})")
        steps.append(plan)
        m = max_offdiag_nonoverlap(forest.sim, forest)
    if len(forest) > 1:
        root = combine(forest.trees, _next_id(forest.trees))
    else:
        root = forest.trees[0]
    return HierarchyResult(root, steps)


def build_hierarchy(s: SimilarityMatrix, cfg: HierarchyConfig | None = None) -> ClassTree:
    return trace_hierarchy(s, cfg).tree
