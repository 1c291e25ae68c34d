"""Brute-force reference implementations used for differential testing.

Nothing here is fast. These functions recheck the engine by exhaustive
enumeration over plain Python lists and bitmasks and share no code with it.
"""
from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

MAX_CLIQUE_N = 12


class TooLarge(ValueError):
    def __init__(self, n: int):
        super().__init__(f"exhaustive clique enumeration is limited to n <= {MAX_CLIQUE_N}, got {n}")
        self.n = n


def oracle_pairs(s, delta: float) -> list[tuple[int, int, float]]:
    """Direct O(n^3) transcription of the merge condition."""
    a = np.asarray(getattr(s, "s", s), dtype=float).tolist()
    n = len(a)
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            best = None
            for k in range(n):
                if k != i and (best is None or a[i][k] > best):
                    best = a[i][k]
            for k in range(n):
                if k != j and (best is None or a[j][k] > best):
                    best = a[j][k]
            if a[i][j] > 0 and a[i][j] + delta >= best:
                out.append((i, j, a[i][j]))
    # selection-style ordering, kept independent of the engine's sort key
    ordered = []
    while out:
        pick = out[0]
        for cand in out[1:]:
            if cand[2] > pick[2] or (cand[2] == pick[2] and cand[:2] < pick[:2]):
                pick = cand
        ordered.append(pick)
        out.remove(pick)
    return ordered


def _maximal_cliques_with(i: int, adj: list[int], n: int) -> list[list[int]]:
    """Every maximal clique containing ``i``, by enumerating neighbourhood subsets."""
    nbrs = [v for v in range(n) if adj[i] >> v & 1]
    found = []
    for mask in range(1 << len(nbrs)):
        members = [i] + [nbrs[b] for b in range(len(nbrs)) if mask >> b & 1]
        bits = 0
        for v in members:
            bits |= 1 << v
        if any((bits & ~(1 << v)) & ~adj[v] for v in members):
            continue
        extendable = any(
            not bits >> w & 1 and all(adj[w] >> v & 1 for v in members) for w in range(n))
        if not extendable:
            found.append(sorted(members))
    found.sort()
    return found


def oracle_max_cliques(p: Iterable[Sequence], n: int) -> list[list[int]]:
    """Multiple-inheritance merge graphs by exhaustive clique enumeration.

    Applies the same per-seed bookkeeping as the engine (free flags, pair
    removal, pruning of dominated neighbours, final subset filter).
    """
    if n > MAX_CLIQUE_N:
        raise TooLarge(n)
    edges = {(min(q[0], q[1]), max(q[0], q[1])) for q in p}
    free = [True] * n
    graphs: list[list[int]] = []
    for i in range(n):
        adj = [0] * n
        for a, b in edges:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        for g in _maximal_cliques_with(i, adj, n):
            if len(g) > 1 or free[i]:
                graphs.append(g)
            for j in g:
                free[j] = False
        edges = {e for e in edges if i not in e}
        for j in range(n):
            if adj[i] >> j & 1:
                rest_j = adj[j] & ~(1 << i)
                if rest_j & ~adj[i] == 0:
                    edges = {e for e in edges if j not in e}
    keep = []
    for g in graphs:
        if len(g) > 1 and not any(set(g) < set(h) for h in graphs):
            keep.append(g)
    return keep


def is_island_partition(s, blocks: Sequence[Sequence[int]]) -> bool:
    """True iff ``blocks`` partition the classes into islands of ``s``.

    Cross-block similarities must be zero and every member of a block with
    two or more classes needs a positive partner inside it. A one-class
    block is accepted as a perfectly classified class.
    """
    a = np.asarray(getattr(s, "s", s), dtype=float)
    n = a.shape[0]
    seen = sorted(i for b in blocks for i in b)
    if seen != list(range(n)) or len(blocks) < 2:
        return False
    where = {i: k for k, b in enumerate(blocks) for i in b}
    for i in range(n):
        for j in range(n):
            if i != j and where[i] != where[j] and a[i, j] != 0:
                return False
    for b in blocks:
        if len(b) == 1:
            continue
        for i in b:
            if not any(j != i and a[i, j] != 0 for j in b):
                return False
    return True
