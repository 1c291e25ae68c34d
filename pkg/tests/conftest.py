from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from hierarch.hierarchy import Internal, Leaf
from hierarch.synth import reference_counts, reference_similarity

GOLDEN = Path(__file__).parent / "golden"

# criterion id -> (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  [{key}] {detail}")


def tree(spec):
    """Nested lists of ints -> ClassTree (ids are irrelevant for shape tests)."""
    if isinstance(spec, int):
        return Leaf(spec, str(spec))
    return Internal(tuple(tree(c) for c in spec))


@pytest.fixture
def ref_sim():
    return reference_similarity()


@pytest.fixture
def ref_counts():
    return reference_counts()


@pytest.fixture
def ref_sit_tree():
    return tree([[[0, 1], 5], [2, 3, 4]])


@pytest.fixture
def ref_mit_tree():
    return tree([[[0, 1], [0, 5]], [2, 3, 4]])


def sparse_confusion(n: int, rng: np.random.Generator) -> np.ndarray:
    """Classifier-like counts: heavy diagonal, a random few confusable classes per row."""
    counts = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        others = [j for j in range(n) if j != i]
        k = int(rng.integers(0, n))
        picked = rng.choice(others, size=min(k, n - 1), replace=False)
        w = np.zeros(n)
        w[i] = rng.uniform(2, 20)
        w[picked] = rng.uniform(0, 1, len(picked))
        counts[i] = rng.multinomial(int(rng.integers(20, 500)), w / w.sum())
        if counts[i].sum() == 0:
            counts[i, i] = 1
    return counts
