"""Hierarchical reporting over encoding trees and the resulting tree kernel.

Labels propagate from the leaves to the root of a uniform-height tree: each
internal node's multiset of child labels is sorted, serialized and compressed
to a fresh integer through a shared injective dictionary.  A tree's feature
vector counts every node's compressed label, stratified by height; the kernel
of two trees is the inner product of their feature vectors.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .entropy import EncodingTree
from .graphs import InitialLabeling

GAMMA_AUTO = "auto"
GAMMA_SCALE = "scale"


class LabelDictionary:
    """Injective map from height-prefixed label strings to compact integers.

    The height prefix keeps the alphabets of different heights disjoint even
    when the underlying payloads coincide.  Once frozen, unseen strings raise
    instead of allocating new ids.
    """

    def __init__(self):
        self._table: dict[str, int] = {}
        self._ids_by_height: dict[int, list[int]] = {}
        self.frozen = False

    def __len__(self) -> int:
        return len(self._table)

    @property
    def next_id(self) -> int:
        return len(self._table)

    def intern(self, height: int, payload: str) -> int:
        key = f"{height}|{payload}"
        found = self._table.get(key)
        if found is not None:
            return found
        if self.frozen:
            raise KeyError(f"unknown label {payload!r} at height {height} in a frozen dictionary")
        new_id = len(self._table)
        self._table[key] = new_id
        self._ids_by_height.setdefault(height, []).append(new_id)
        return new_id

    def freeze(self) -> None:
        self.frozen = True

    def heights(self) -> list[int]:
        return sorted(self._ids_by_height)

    def ids_at_height(self, height: int) -> tuple[int, ...]:
        return tuple(self._ids_by_height.get(height, ()))

    def height_ranges(self) -> dict[int, tuple[int, int]]:
        """(min id, max id) per height; contiguous under height-major interning."""
        return {h: (min(ids), max(ids)) for h, ids in self._ids_by_height.items() if ids}

    def entries(self) -> dict[str, int]:
        return dict(self._table)


@dataclass(frozen=True)
class FeatureVector:
    """Per-height label counts of one tree plus bookkeeping.

    ``counts_by_height[i]`` maps compressed label id -> multiplicity among
    the nodes at height i.  Ids are globally unique across heights, so the
    flattened view loses nothing.
    """

    height: int
    counts_by_height: tuple[dict, ...]
    dictionary: LabelDictionary = field(compare=False, repr=False)
    node_visits: int = field(compare=False, default=0)

    def flat(self) -> dict[int, int]:
        merged: dict[int, int] = {}
        for level in self.counts_by_height:
            merged.update(level)
        return merged

    def squared_norm(self) -> float:
        return float(sum(c * c for level in self.counts_by_height for c in level.values()))


@dataclass(frozen=True)
class KernelMatrix:
    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[0] != self.values.shape[1]:
            raise ValueError(f"kernel matrix must be square, got shape {self.values.shape}")

    @property
    def size(self) -> int:
        return self.values.shape[0]


def _levels_by_height(tree: EncodingTree, expect_height: int | None = None) -> list[list[int]]:
    """Node ids grouped by height (ascending), each group in id order.

    Rejects trees whose leaves are not all at the same depth.
    """
    depths = {tree.root: 0}
    stack = [tree.root]
    max_depth = 0
    while stack:
        nid = stack.pop()
        node = tree.nodes[nid]
        for c in node.children:
            depths[c] = depths[nid] + 1
            stack.append(c)
        if node.is_leaf:
            max_depth = max(max_depth, depths[nid])
    height = max_depth
    if expect_height is not None and height != expect_height:
        raise ValueError(f"tree height {height} does not match expected {expect_height}")
    for nid, node in tree.nodes.items():
        if node.is_leaf and depths[nid] != height:
            raise ValueError("non-uniform leaf depth; pad the tree before reporting")
    levels: list[list[int]] = [[] for _ in range(height + 1)]
    for nid in tree.node_ids():
        levels[height - depths[nid]].append(nid)
    return levels


def compute_feature_vectors(
    trees: list[EncodingTree],
    labelings: list[InitialLabeling],
    dictionary: LabelDictionary,
) -> list[FeatureVector]:
    """One reporting pass per tree, interned height-by-height across the list.

    Processing all trees at one height before moving up keeps each height's
    alphabet a contiguous id range in the dictionary; per-tree results are
    unaffected by the batching because ids only relabel, never collide.
    """
    if len(trees) != len(labelings):
        raise ValueError("one labeling per tree required")
    if not trees:
        return []
    all_levels = [_levels_by_height(t) for t in trees]
    height = len(all_levels[0]) - 1
    for lv in all_levels:
        if len(lv) - 1 != height:
            raise ValueError("all trees must share one height")

    node_labels: list[dict[int, int]] = [{} for _ in trees]
    visits = [0] * len(trees)
    for ti, (tree, labeling, levels) in enumerate(zip(trees, labelings, all_levels)):
        for nid in levels[0]:
            vertex = tree.nodes[nid].leaf_vertex
            node_labels[ti][nid] = dictionary.intern(0, str(labeling.label_of[vertex]))
            visits[ti] += 1
    for i in range(1, height + 1):
        for ti, (tree, levels) in enumerate(zip(trees, all_levels)):
            labels = node_labels[ti]
            for nid in levels[i]:
                children = tree.nodes[nid].children
                payload = "|".join(str(x) for x in sorted(labels[c] for c in children))
                labels[nid] = dictionary.intern(i, payload)
                visits[ti] += 1

    out = []
    for ti, levels in enumerate(all_levels):
        counts = tuple(dict(Counter(node_labels[ti][nid] for nid in level)) for level in levels)
        out.append(FeatureVector(height=height, counts_by_height=counts,
                                 dictionary=dictionary, node_visits=visits[ti]))
    return out


def hierarchical_reporting(
    tree: EncodingTree,
    initial_labels: InitialLabeling,
    dictionary: LabelDictionary,
) -> FeatureVector:
    """Label one padded tree bottom-up and count labels per height."""
    return compute_feature_vectors([tree], [initial_labels], dictionary)[0]


def kernel_value(fv1: FeatureVector, fv2: FeatureVector) -> float:
    """Sparse dot product over all heights."""
    if fv1.dictionary is not fv2.dictionary:
        raise ValueError("feature vectors built against different label dictionaries")
    total = 0.0
    for level1, level2 in zip(fv1.counts_by_height, fv2.counts_by_height):
        small, big = (level1, level2) if len(level1) <= len(level2) else (level2, level1)
        for label, count in small.items():
            other = big.get(label)
            if other is not None:
                total += count * other
    return total


def feature_csr(fvs: list[FeatureVector]) -> sparse.csr_matrix:
    """Stack feature vectors into an N x |alphabet| sparse count matrix."""
    dim = len(fvs[0].dictionary)
    data, indices, indptr = [], [], [0]
    for fv in fvs:
        flat = fv.flat()
        for label in sorted(flat):
            indices.append(label)
            data.append(float(flat[label]))
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(fvs), dim),
    )


def gram_matrix(
    trees: list[EncodingTree],
    labelings: list[InitialLabeling],
    dictionary: LabelDictionary,
    normalize: bool = False,
) -> KernelMatrix:
    """All-pairs kernel values: one reporting pass per tree, then N^2 dots.

    The dot products run as one sparse matrix product, which is the same
    arithmetic as ``kernel_value`` pair by pair.
    """
    fvs = compute_feature_vectors(trees, labelings, dictionary)
    X = feature_csr(fvs)
    if normalize:
        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
        norms[norms == 0] = 1.0
        X = sparse.diags(1.0 / norms) @ X
    K = (X @ X.T).toarray()
    return KernelMatrix(values=np.asarray(K, dtype=np.float64))


def resolve_gamma(policy: str, feature_count: int, feature_variance: float | None = None) -> float:
    """Dataset-wide gamma: auto -> 1/d, scale -> 1/(d * variance of all entries)."""
    if feature_count <= 0:
        raise ValueError("gamma needs at least one feature")
    if policy == GAMMA_AUTO:
        return 1.0 / feature_count
    if policy == GAMMA_SCALE:
        if feature_variance is None:
            raise ValueError("scale policy needs the feature variance")
        if feature_variance <= 0.0:
            warnings.warn("zero feature variance; falling back to the auto gamma policy")
            return 1.0 / feature_count
        return 1.0 / (feature_count * feature_variance)
    raise ValueError(f"unknown gamma policy {policy!r}")


def feature_matrix_variance(X: sparse.csr_matrix) -> float:
    """Variance over all entries of the dense view of X."""
    n_entries = X.shape[0] * X.shape[1]
    mean = X.sum() / n_entries
    mean_sq = X.multiply(X).sum() / n_entries
    return float(mean_sq - mean * mean)


def rbf_on_features(fv1: FeatureVector, fv2: FeatureVector, gamma: float) -> float:
    """exp(-gamma * squared distance) between two count vectors."""
    if fv1.dictionary is not fv2.dictionary:
        raise ValueError("feature vectors built against different label dictionaries")
    sq_dist = fv1.squared_norm() + fv2.squared_norm() - 2.0 * kernel_value(fv1, fv2)
    return float(np.exp(-gamma * max(sq_dist, 0.0)))


def rbf_gram(linear: KernelMatrix, gamma: float) -> KernelMatrix:
    """Transform a linear Gram matrix into the gamma-kernel Gram matrix."""
    sq = np.diag(linear.values)
    d2 = sq[:, None] + sq[None, :] - 2.0 * linear.values
    np.clip(d2, 0.0, None, out=d2)
    return KernelMatrix(values=np.exp(-gamma * d2))


def write_gram_matrix(path: str, matrix: KernelMatrix, dataset_name: str, mode: str) -> None:
    """Header '<N> <name> <mode>' then N rows of space-separated decimals."""
    with open(path, "w") as fh:
        fh.write(f"{matrix.size} {dataset_name} {mode}\n")
        for row in matrix.values:
            fh.write(" ".join(repr(float(x)) for x in row))
            fh.write("\n")


def write_feature_vectors(path: str, fvs: list[FeatureVector]) -> None:
    """One line per graph of 'height:label:count' triples."""
    with open(path, "w") as fh:
        for fv in fvs:
            triples = []
            for height, level in enumerate(fv.counts_by_height):
                for label in sorted(level):
                    triples.append(f"{height}:{label}:{level[label]}")
            fh.write(" ".join(triples))
            fh.write("\n")
