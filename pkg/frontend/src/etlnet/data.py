"""Readers for the encoding-tree export and leaf-feature sidecar files.

This package deliberately re-implements the two file formats rather than
importing the producer: the line-delimited tree file and the
``vertex:degree[:category]`` sidecar are the whole contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TreeRecord:
    """One exported tree: parent pointers plus per-node heights."""

    graph_index: int
    graph_class: int
    height: int
    node_ids: tuple[int, ...]
    parent: dict[int, int | None]
    node_height: dict[int, int]
    leaf_vertex: dict[int, int]

    @property
    def n_leaves(self) -> int:
        return len(self.leaf_vertex)


def read_trees(path: str) -> list[TreeRecord]:
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: bad tree record: {exc}") from None
            parent, node_height, leaf_vertex = {}, {}, {}
            for node in rec["nodes"]:
                nid = int(node["id"])
                parent[nid] = None if node["parent_id"] is None else int(node["parent_id"])
                node_height[nid] = int(node["height"])
                if "leaf_vertex" in node:
                    leaf_vertex[nid] = int(node["leaf_vertex"])
            record = TreeRecord(
                graph_index=int(rec["graph"]),
                graph_class=int(rec["class"]),
                height=int(rec["height"]),
                node_ids=tuple(sorted(parent)),
                parent=parent,
                node_height=node_height,
                leaf_vertex=leaf_vertex,
            )
            _validate(record, path, lineno)
            records.append(record)
    if not records:
        raise ValueError(f"{path}: no tree records")
    heights = {r.height for r in records}
    if len(heights) > 1:
        raise ValueError(f"{path}: mixed tree heights {sorted(heights)}")
    return records


def _validate(record: TreeRecord, path: str, lineno: int) -> None:
    for nid in record.node_ids:
        h = record.node_height[nid]
        p = record.parent[nid]
        if nid in record.leaf_vertex and h != 0:
            raise ValueError(f"{path}:{lineno}: leaf {nid} at height {h} != 0")
        if p is None:
            if h != record.height:
                raise ValueError(f"{path}:{lineno}: root at height {h} != {record.height}")
        elif record.node_height[p] != h + 1:
            raise ValueError(
                f"{path}:{lineno}: node {nid} at height {h} has parent at "
                f"height {record.node_height[p]} (want {h + 1})"
            )


def read_features(path: str) -> list[list[tuple]]:
    """Per graph: (vertex, degree[, category]) tuples from the sidecar."""
    rows = []
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
            rows.append(sorted(row))
    return rows


@dataclass(frozen=True)
class FeatureEncoder:
    """One-hot degree encoding, optionally concatenated with one-hot category.

    Vocabularies cover the distinct values observed across the dataset, so
    exactly one degree slot is active per leaf.
    """

    degree_values: tuple[float, ...]
    category_values: tuple[int, ...] | None

    @classmethod
    def fit(cls, feature_rows: list[list[tuple]]) -> "FeatureEncoder":
        degrees = sorted({t[1] for row in feature_rows for t in row})
        with_category = all(len(t) == 3 for row in feature_rows for t in row)
        categories = (
            tuple(sorted({t[2] for row in feature_rows for t in row}))
            if with_category else None
        )
        return cls(degree_values=tuple(degrees), category_values=categories)

    @property
    def dim(self) -> int:
        return len(self.degree_values) + (len(self.category_values) if self.category_values else 0)

    def encode_graph(self, row: list[tuple]) -> np.ndarray:
        deg_index = {d: i for i, d in enumerate(self.degree_values)}
        out = np.zeros((len(row), self.dim), dtype=np.float32)
        for v, entry in enumerate(row):
            if entry[0] != v:
                raise ValueError(f"sidecar row not contiguous at vertex {entry[0]}")
            out[v, deg_index[entry[1]]] = 1.0
            if self.category_values is not None:
                cat_index = self.category_values.index(entry[2])
                out[v, len(self.degree_values) + cat_index] = 1.0
        return out


def load_dataset(trees_path: str, features_path: str):
    """Trees + encoded leaf features + classes, aligned by graph order."""
    records = read_trees(trees_path)
    feature_rows = read_features(features_path)
    if len(feature_rows) != len(records):
        raise ValueError(
            f"{len(records)} trees but {len(feature_rows)} feature rows"
        )
    for rec, row in zip(records, feature_rows):
        if rec.n_leaves != len(row):
            raise ValueError(
                f"graph {rec.graph_index}: {rec.n_leaves} leaves but "
                f"{len(row)} leaf features"
            )
    encoder = FeatureEncoder.fit(feature_rows)
    features = [encoder.encode_graph(row) for row in feature_rows]
    classes = np.asarray([r.graph_class for r in records], dtype=np.int64)
    return records, features, classes, encoder
