"""Line-delimited text formats: encoding-tree export and leaf-feature sidecar.

The tree file carries one JSON object per line per graph with node records
``{id, parent_id, height, leaf_vertex?, vol, cut}``; the sidecar carries one
line per graph of ``vertex:degree[:category]`` tokens.  These two files are
the interface consumed by downstream learners.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .entropy import EncodingTree, TreeNode
from .graphs import Graph


@dataclass(frozen=True)
class ExportedTree:
    """One parsed record of the tree file."""

    graph_index: int
    graph_class: int
    height: int
    tree: EncodingTree


def tree_to_record(tree: EncodingTree, graph_index: int, graph_class: int) -> dict:
    height = tree.height()
    depths = {tree.root: 0}
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        for c in tree.nodes[nid].children:
            depths[c] = depths[nid] + 1
            stack.append(c)
    nodes = []
    for nid in tree.node_ids():
        node = tree.nodes[nid]
        rec = {
            "id": nid,
            "parent_id": node.parent,
            "height": height - depths[nid],
            "vol": node.vol,
            "cut": node.cut,
        }
        if node.is_leaf:
            rec["leaf_vertex"] = node.leaf_vertex
        nodes.append(rec)
    return {
        "graph": graph_index,
        "class": graph_class,
        "height": height,
        "nodes": nodes,
    }


def write_tree_export(path: str, trees, classes) -> None:
    """One JSON object per line, graphs in dataset order."""
    with open(path, "w") as fh:
        for i, (tree, cls) in enumerate(zip(trees, classes)):
            fh.write(json.dumps(tree_to_record(tree, i, cls), sort_keys=True))
            fh.write("\n")


def read_tree_export(path: str) -> list[ExportedTree]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad tree record: {exc}") from None
            out.append(_record_to_tree(rec, path, lineno))
    return out


def _record_to_tree(rec: dict, path: str, lineno: int) -> ExportedTree:
    tree = EncodingTree()
    max_id = -1
    for node_rec in rec["nodes"]:
        nid = int(node_rec["id"])
        parent = node_rec["parent_id"]
        tree.nodes[nid] = TreeNode(
            id=nid,
            parent=None if parent is None else int(parent),
            leaf_vertex=node_rec.get("leaf_vertex"),
            vol=float(node_rec["vol"]),
            cut=float(node_rec["cut"]),
        )
        max_id = max(max_id, nid)
        if parent is None:
            tree.root = nid
    tree._next_id = max_id + 1
    for nid in tree.node_ids():
        node = tree.nodes[nid]
        if node.parent is not None:
            tree.nodes[node.parent].children.append(nid)
    if tree.root is None:
        raise ValueError(f"{path}:{lineno}: tree record has no root")
    return ExportedTree(
        graph_index=int(rec["graph"]),
        graph_class=int(rec["class"]),
        height=int(rec["height"]),
        tree=tree,
    )


def _format_degree(d: float) -> str:
    return str(int(d)) if float(d).is_integer() else repr(d)


def write_leaf_features(path: str, graphs: list[Graph], include_category: bool) -> None:
    """Sidecar with per-leaf ``vertex:degree[:category]`` tokens, one graph per line."""
    with open(path, "w") as fh:
        for g in graphs:
            tokens = []
            for v in range(g.vertex_count):
                token = f"{v}:{_format_degree(g.degree[v])}"
                if include_category:
                    token += f":{g.categorical_label[v]}"
                tokens.append(token)
            fh.write(" ".join(tokens))
            fh.write("\n")


def read_leaf_features(path: str) -> list[list[tuple]]:
    """Per graph, a list of (vertex, degree[, category]) tuples."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            row = []
            for token in text.split():
                parts = token.split(":")
                if len(parts) == 2:
                    row.append((int(parts[0]), float(parts[1])))
                elif len(parts) == 3:
                    row.append((int(parts[0]), float(parts[1]), int(parts[2])))
                else:
                    raise ValueError(f"{path}:{lineno}: bad feature token {token!r}")
            out.append(row)
    return out
