import json
import os

import pytest


def chain_tree_record(graph_index, graph_class, n_leaves, height):
    """Padded tree: root over one unary chain per leaf (uniform depth)."""
    nodes = []
    next_id = 0
    leaf_ids = []
    for v in range(n_leaves):
        nodes.append({"id": next_id, "parent_id": None, "height": 0,
                      "vol": 1.0, "cut": 1.0, "leaf_vertex": v})
        leaf_ids.append(next_id)
        next_id += 1
    root_id = next_id
    nodes.append({"id": root_id, "parent_id": None, "height": height,
                  "vol": float(n_leaves), "cut": 0.0})
    next_id += 1
    for v, leaf in enumerate(leaf_ids):
        below = root_id
        for h in range(height - 1, 0, -1):
            nodes.append({"id": next_id, "parent_id": below, "height": h,
                          "vol": 1.0, "cut": 1.0})
            below = next_id
            next_id += 1
        nodes[leaf]["parent_id"] = below
    return {"graph": graph_index, "class": graph_class, "height": height,
            "nodes": nodes}


def binary_tree_record(graph_index, graph_class):
    """Height-2 tree: root -> two modules -> two leaves each."""
    nodes = [
        {"id": 0, "parent_id": 5, "height": 0, "vol": 1.0, "cut": 1.0, "leaf_vertex": 0},
        {"id": 1, "parent_id": 5, "height": 0, "vol": 1.0, "cut": 1.0, "leaf_vertex": 1},
        {"id": 2, "parent_id": 6, "height": 0, "vol": 1.0, "cut": 1.0, "leaf_vertex": 2},
        {"id": 3, "parent_id": 6, "height": 0, "vol": 1.0, "cut": 1.0, "leaf_vertex": 3},
        {"id": 4, "parent_id": None, "height": 2, "vol": 4.0, "cut": 0.0},
        {"id": 5, "parent_id": 4, "height": 1, "vol": 2.0, "cut": 2.0},
        {"id": 6, "parent_id": 4, "height": 1, "vol": 2.0, "cut": 2.0},
    ]
    return {"graph": graph_index, "class": graph_class, "height": 2, "nodes": nodes}


def write_dataset(dir_path, records, feature_rows):
    """records: list of dicts; feature_rows: per graph list of token strings."""
    os.makedirs(dir_path, exist_ok=True)
    trees = os.path.join(dir_path, "trees.jsonl")
    feats = os.path.join(dir_path, "trees.jsonl.features")
    with open(trees, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(feats, "w") as fh:
        for row in feature_rows:
            fh.write(" ".join(row) + "\n")
    return trees, feats


def toy_two_class_dataset(dir_path, n_each=10, height=2):
    """Class 0: all leaf degrees 2; class 1: degrees 1,2,1 (3 leaves each)."""
    records, rows = [], []
    for i in range(2 * n_each):
        cls = i % 2
        records.append(chain_tree_record(i, cls, 3, height))
        rows.append(["0:2", "1:2", "2:2"] if cls == 0 else ["0:1", "1:2", "2:1"])
    return write_dataset(dir_path, records, rows)


def dataset_dir(name: str):
    roots = []
    env = os.environ.get("SETREE_DATASETS")
    if env:
        roots.append(env)
    here = os.path.dirname(os.path.abspath(__file__))
    repo_root = os.path.dirname(os.path.dirname(here))
    roots.append(os.path.join(repo_root, "data"))
    for root in roots:
        candidate = os.path.join(root, name)
        if os.path.isfile(os.path.join(candidate, f"{name}_A.txt")):
            return candidate
    return None


def require_dataset(name: str) -> str:
    path = dataset_dir(name)
    if path is None:
        pytest.skip(
            f"{name} benchmark files not available in this environment "
            f"(no network access to fetch them); place the flat files under "
            f"data/{name}/ or set SETREE_DATASETS to run this check"
        )
    return path
