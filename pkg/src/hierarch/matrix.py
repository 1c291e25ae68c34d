"""Confusion matrices, confusion-rate matrices and class similarity matrices.

Rows of a confusion matrix are true classes and columns are predictions, so
``counts[i, j]`` is the number of class ``i`` test samples predicted as ``j``.
All three matrix types are frozen: their arrays are marked read-only.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

SYMMETRY_TOL = 1e-9


class MatrixError(ValueError):
    """Raised for a structurally invalid matrix."""


class NotSquareError(MatrixError):
    pass


class ZeroRowError(MatrixError):
    def __init__(self, row: int):
        super().__init__(f"row {row} sums to 0 (class has no test samples)")
        self.row = row


class ParseError(MatrixError):
    """Input file could not be parsed; carries a 1-based line/column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def _check_labels(labels: Sequence[str], n: int) -> tuple[str, ...]:
    labels = tuple(labels)
    if len(labels) != n:
        raise MatrixError(f"expected {n} labels, got {len(labels)}")
    for lab in labels:
        if not isinstance(lab, str) or not lab:
            raise MatrixError(f"labels must be non-empty strings, got {lab!r}")
    if len(set(labels)) != n:
        raise MatrixError("labels must be unique")
    return labels


def _check_square(a: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSquareError(f"matrix must be square, got shape {a.shape}")


def default_labels(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    labels: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        _check_square(counts)
        n = counts.shape[0]
        if n < 2:
            raise MatrixError("a confusion matrix needs at least 2 classes")
        if counts.dtype.kind == "f":
            if not np.all(np.isfinite(counts)):
                raise MatrixError("counts must be finite")
            if not np.all(counts == np.round(counts)):
                raise MatrixError("counts must be integers")
        elif counts.dtype.kind not in "iub":
            raise MatrixError(f"counts must be integers, got dtype {counts.dtype}")
        counts = counts.astype(np.int64)
        if np.any(counts < 0):
            i, j = np.argwhere(counts < 0)[0]
            raise MatrixError(f"negative count at ({i}, {j})")
        rows = counts.sum(axis=1)
        if np.any(rows == 0):
            raise ZeroRowError(int(np.flatnonzero(rows == 0)[0]))
        object.__setattr__(self, "labels", _check_labels(self.labels, n))
        object.__setattr__(self, "counts", _frozen(counts))

    @property
    def n(self) -> int:
        return self.counts.shape[0]

    @classmethod
    def from_counts(cls, counts, labels: Sequence[str] | None = None) -> "ConfusionMatrix":
        counts = np.asarray(counts)
        if labels is None:
            labels = default_labels(counts.shape[0] if counts.ndim else 0)
        return cls(tuple(labels), counts)


@dataclass(frozen=True, eq=False)
class NormalizedConfusionMatrix:
    rates: np.ndarray
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        _check_square(rates)
        if not np.allclose(rates.sum(axis=1), 1.0, rtol=0, atol=1e-9):
            raise MatrixError("rows of a confusion-rate matrix must sum to 1")
        if np.any(rates < 0) or np.any(rates > 1):
            raise MatrixError("rates must lie in [0, 1]")
        object.__setattr__(self, "rates", _frozen(rates))
        if not self.labels:
            object.__setattr__(self, "labels", default_labels(rates.shape[0]))

    @property
    def n(self) -> int:
        return self.rates.shape[0]


@dataclass(frozen=True, eq=False)
class SimilarityMatrix:
    """Symmetric class-similarity matrix with entries in [0, 1].

    Construct with :meth:`from_array` when the input is external; it checks
    symmetry to ``1e-9`` and then symmetrizes exactly.
    """

    s: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        _check_square(s)
        if not np.all(np.isfinite(s)):
            raise MatrixError("similarities must be finite")
        if np.any(s < 0) or np.any(s > 1):
            raise MatrixError("similarities must lie in [0, 1]")
        if not np.array_equal(s, s.T):
            raise MatrixError("similarity matrix is not exactly symmetric")
        object.__setattr__(self, "s", _frozen(s))
        if self.labels:
            object.__setattr__(self, "labels", _check_labels(self.labels, s.shape[0]))
        else:
            object.__setattr__(self, "labels", default_labels(s.shape[0]))

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @classmethod
    def from_array(cls, a, labels: Sequence[str] | None = None) -> "SimilarityMatrix":
        a = np.asarray(a, dtype=float)
        _check_square(a)
        if not np.all(np.isfinite(a)):
            raise MatrixError("similarities must be finite")
        if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL:
            raise MatrixError("similarity matrix is not symmetric within 1e-9")
        # float addition commutes, so this is exactly symmetric
        return cls((a + a.T) / 2, tuple(labels or ()))


def normalize(cm: ConfusionMatrix) -> NormalizedConfusionMatrix:
    counts = cm.counts.astype(float)
    rows = counts.sum(axis=1, keepdims=True)
    if np.any(rows == 0):
        raise ZeroRowError(int(np.flatnonzero(rows[:, 0] == 0)[0]))
    return NormalizedConfusionMatrix(counts / rows, cm.labels)


def similarity(nm: NormalizedConfusionMatrix) -> SimilarityMatrix:
    r = nm.rates
    return SimilarityMatrix((r + r.T) / 2, nm.labels)


def similarity_from_counts(cm: ConfusionMatrix) -> SimilarityMatrix:
    return similarity(normalize(cm))


def max_offdiag_nonoverlap(s: SimilarityMatrix, forest) -> float:
    """Largest similarity between two trees of ``forest`` that share no class.

    ``forest`` is a :class:`hierarch.hierarchy.Forest` or a sequence of trees;
    returns 0 when every pair overlaps (or there is only one tree).
    """
    trees = getattr(forest, "trees", forest)
    if len(trees) != s.n:
        raise MatrixError(f"forest has {len(trees)} trees but matrix is {s.n}x{s.n}")
    leaves = [t.leaf_set() for t in trees]
    best = 0.0
    for i in range(s.n):
        for j in range(i + 1, s.n):
            if s.s[i, j] > best and leaves[i].isdisjoint(leaves[j]):
                best = float(s.s[i, j])
    return best


# --- file input -----------------------------------------------------------

def _parse_number(text: str, line: int, column: int, integer: bool) -> float:
    text = text.strip()
    try:
        value = int(text) if integer else float(text)
    except ValueError:
        kind = "an integer" if integer else "a number"
        raise ParseError(f"expected {kind}, got {text!r}", line, column) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", line, column)
    if value < 0:
        raise ParseError(f"negative value {text!r}", line, column)
    return value


def parse_csv(text: str, kind: str = "counts"):
    """Parse a header-plus-rows CSV matrix.

    ``kind`` is ``"counts"`` (returns :class:`ConfusionMatrix`) or
    ``"similarity"`` (returns :class:`SimilarityMatrix`).
    """
    integer = kind == "counts"
    rows = [r for r in csv.reader(io.StringIO(text))]
    # keep original line numbers while skipping blank lines
    numbered = [(k + 1, r) for k, r in enumerate(rows) if any(c.strip() for c in r)]
    if not numbered:
        raise ParseError("empty input", 1)
    header_line, header = numbered[0]
    labels = [h.strip() for h in header]
    n = len(labels)
    for col, lab in enumerate(labels, start=1):
        if not lab:
            raise ParseError("empty class label in header", header_line, col)
    data = numbered[1:]
    if len(data) != n:
        line = data[n][0] if len(data) > n else (data[-1][0] + 1 if data else header_line + 1)
        raise ParseError(f"expected {n} matrix rows after the header, got {len(data)}", line)
    values = []
    for row_idx, (line, cells) in enumerate(data):
        if len(cells) != n:
            raise ParseError(
                f"matrix row {row_idx} has {len(cells)} values, expected {n}",
                line, min(len(cells), n) + 1)
        values.append([_parse_number(c, line, col, integer) for col, c in enumerate(cells, 1)])
    return _build(values, labels, kind)


def parse_json(text: str, kind: str | None = None):
    """Parse ``{"labels": [...], "matrix": [[...], ...]}``.

    An optional ``"kind"`` key (``counts`` or ``similarity``) is honoured
    unless ``kind`` is passed explicitly.
    """
    def reject(token):
        raise ParseError(f"non-finite value {token}")

    try:
        doc = json.loads(text, parse_constant=reject)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise ParseError('expected an object with a "matrix" key')
    kind = kind or doc.get("kind", "counts")
    if kind not in ("counts", "similarity"):
        raise ParseError(f"unknown matrix kind {kind!r}")
    matrix = doc["matrix"]
    if not isinstance(matrix, list) or not matrix:
        raise ParseError('"matrix" must be a non-empty array of arrays')
    n = len(matrix)
    labels = doc.get("labels", list(default_labels(n)))
    if not isinstance(labels, list) or len(labels) != n:
        raise ParseError(f'"labels" must be an array of {n} strings')
    values = []
    for i, row in enumerate(matrix):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"matrix row {i} must be an array of {n} numbers")
        out = []
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"matrix[{i}][{j}] is not a number: {v!r}")
            if v < 0:
                raise ParseError(f"matrix[{i}][{j}] is negative: {v!r}")
            if kind == "counts" and v != int(v):
                raise ParseError(f"matrix[{i}][{j}] is not an integer count: {v!r}")
            out.append(v)
        values.append(out)
    return _build(values, labels, kind)


def _build(values, labels, kind):
    try:
        if kind == "counts":
            return ConfusionMatrix(tuple(labels), np.array(values, dtype=np.int64))
        return SimilarityMatrix.from_array(np.array(values, dtype=float), labels)
    except ParseError:
        raise
    except MatrixError as exc:
        raise ParseError(str(exc)) from None


def load_matrix(path: str | Path, kind: str | None = None):
    """Read a CSV or JSON matrix file, dispatching on the suffix."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return parse_json(text, kind)
    return parse_csv(text, kind or "counts")


def to_csv(labels: Sequence[str], matrix: np.ndarray, integer: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(labels)
    for row in matrix:
        w.writerow([str(int(v)) if integer else repr(float(v)) for v in row])
    return buf.getvalue()


def to_json(labels: Sequence[str], matrix: np.ndarray, kind: str) -> str:
    conv = int if kind == "counts" else float
    doc = {"kind": kind, "labels": list(labels),
           "matrix": [[conv(v) for v in row] for row in matrix]}
    return json.dumps(doc, indent=2) + "\n"
