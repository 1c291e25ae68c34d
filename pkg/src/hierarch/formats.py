"""Tree serialization: JSON (round-trippable), DOT, Newick and ASCII outline."""
from __future__ import annotations

import json
import re

from .hierarchy import ClassTree, Internal, Leaf, TreeError

FORMATS = ("json", "dot", "newick", "ascii")


def _label(t: ClassTree) -> str:
    if isinstance(t, Leaf):
        return t.label or str(t.class_id)
    return t.label


def to_dict(t: ClassTree) -> dict:
    if isinstance(t, Leaf):
        return {"id": t.class_id, "label": _label(t), "classes": [t.class_id], "children": []}
    return {
        "id": t.synthetic_id,
        "label": t.label,
        "classes": sorted(t.leaf_set()),
        "children": [to_dict(c) for c in t.children],
    }


def to_json(t: ClassTree) -> str:
    return json.dumps(to_dict(t), indent=2) + "\n"


def from_dict(doc: dict) -> ClassTree:
    try:
        children = doc.get("children") or []
        if not children:
            label = doc.get("label")
            return Leaf(int(doc["id"]), "" if label is None else str(label))
        return Internal(tuple(from_dict(c) for c in children), int(doc["id"]))
    except (KeyError, TypeError, AttributeError) as exc:
        raise TreeError(f"malformed tree node: {exc}") from None


def from_json(text: str) -> ClassTree:
    try:
        return from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise TreeError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


_NEWICK_SAFE = re.compile(r"^[^\s(),:;'\[\]]+$")


def _newick_label(text: str) -> str:
    if _NEWICK_SAFE.match(text):
        return text
    return "'" + text.replace("'", "''") + "'"


def to_newick(t: ClassTree) -> str:
    def render(node) -> str:
        if isinstance(node, Leaf):
            return _newick_label(_label(node))
        return "(" + ",".join(render(c) for c in node.children) + ")"

    return render(t) + ";\n"


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(t: ClassTree, name: str = "hierarchy") -> str:
    # node ids are per occurrence: a class can appear several times in an MIT
    lines = [f"digraph {name} {{"]
    edges = []
    counter = 0

    def visit(node) -> str:
        nonlocal counter
        node_id = f"n{counter}"
        counter += 1
        if isinstance(node, Leaf):
            lines.append(f"  {node_id} [shape=box, label={_dot_quote(_label(node))}];")
        else:
            lines.append(f"  {node_id} [shape=ellipse, label={_dot_quote(node.label)}];")
            for c in node.children:
                edges.append(f"  {node_id} -> {visit(c)};")
        return node_id

    visit(t)
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_ascii(t: ClassTree) -> str:
    out = []

    def visit(node, level):
        pad = "  " * level
        if isinstance(node, Leaf):
            out.append(f"{pad}{_label(node)}")
        else:
            out.append(f"{pad}{node.label} {sorted(node.leaf_set())}")
            for c in node.children:
                visit(c, level + 1)

    visit(t, 0)
    return "\n".join(out) + "\n"


def render(t: ClassTree, fmt: str) -> str:
    if fmt == "json":
        return to_json(t)
    if fmt == "dot":
        return to_dot(t)
    if fmt == "newick":
        return to_newick(t)
    if fmt == "ascii":
        return to_ascii(t)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")
