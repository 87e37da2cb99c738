"""Encoding trees and the structural entropy of a graph on a tree.

An encoding tree is a rooted tree whose leaves are the graph's vertices.
Every node caches ``vol`` (total degree of the vertices beneath it) and
``cut`` (total weight of edges with exactly one endpoint beneath it).  The
entropy of a graph on a tree sums, over all non-root nodes a with parent p,

    -(cut(a) / vol(V)) * log2(vol(a) / vol(p)),

with cut-zero terms defined as exactly 0.  Values are in bits (log base 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .graphs import DegenerateGraphError, Graph

#: Absolute tolerance used when comparing entropy or cache values in tests.
ENTROPY_ATOL = 1e-9

BRUTE_FORCE_MAX_VERTICES = 9
BRUTE_FORCE_HEIGHTS = (2, 3)


@dataclass
class TreeNode:
    id: int
    parent: int | None
    children: list[int] = field(default_factory=list)
    leaf_vertex: int | None = None
    vol: float = 0.0
    cut: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.leaf_vertex is not None


class EncodingTree:
    """Arena of TreeNodes addressed by stable integer ids.

    Mutable while the optimizer works on it; treated as immutable once
    returned to callers.  Node iteration is always in id order so that
    floating-point accumulation is reproducible.
    """

    def __init__(self):
        self.nodes: dict[int, TreeNode] = {}
        self.root: int | None = None
        self._next_id = 0

    def new_node(self, parent: int | None, leaf_vertex: int | None = None,
                 vol: float = 0.0, cut: float = 0.0) -> int:
        nid = self._next_id
        self._next_id += 1
        self.nodes[nid] = TreeNode(id=nid, parent=parent, leaf_vertex=leaf_vertex,
                                   vol=vol, cut=cut)
        if parent is not None:
            self.nodes[parent].children.append(nid)
        return nid

    def node_ids(self) -> list[int]:
        return sorted(self.nodes)

    def leaf_ids(self) -> list[int]:
        return [nid for nid in self.node_ids() if self.nodes[nid].is_leaf]

    def depth(self, nid: int) -> int:
        d = 0
        node = self.nodes[nid]
        while node.parent is not None:
            node = self.nodes[node.parent]
            d += 1
        return d

    def height(self) -> int:
        """Maximum leaf depth."""
        depths = {self.root: 0}
        stack = [self.root]
        best = 0
        while stack:
            nid = stack.pop()
            node = self.nodes[nid]
            if node.is_leaf:
                best = max(best, depths[nid])
            for c in node.children:
                depths[c] = depths[nid] + 1
                stack.append(c)
        return best

    def node_count(self) -> int:
        return len(self.nodes)

    def copy(self) -> "EncodingTree":
        dup = EncodingTree()
        dup.root = self.root
        dup._next_id = self._next_id
        for nid, node in self.nodes.items():
            dup.nodes[nid] = TreeNode(id=node.id, parent=node.parent,
                                      children=list(node.children),
                                      leaf_vertex=node.leaf_vertex,
                                      vol=node.vol, cut=node.cut)
        return dup


def validate_tree(graph: Graph, tree: EncodingTree) -> None:
    """Check the structural invariants; raises ValueError on violation.

    Degree-0 vertices are permitted as zero-volume leaves (they are attached
    directly under the root by the optimizer and contribute nothing).
    """
    leaves = tree.leaf_ids()
    vertices = sorted(tree.nodes[l].leaf_vertex for l in leaves)
    if vertices != list(range(graph.vertex_count)):
        raise ValueError("tree leaves are not a bijection with graph vertices")
    root = tree.nodes[tree.root]
    if root.parent is not None:
        raise ValueError("root has a parent")
    if abs(root.vol - graph.volume) > ENTROPY_ATOL:
        raise ValueError(f"root vol {root.vol} != vol(V) {graph.volume}")
    if abs(root.cut) > ENTROPY_ATOL:
        raise ValueError(f"root cut {root.cut} != 0")
    for nid in tree.node_ids():
        node = tree.nodes[nid]
        if node.children:
            child_vol = sum(tree.nodes[c].vol for c in node.children)
            if abs(child_vol - node.vol) > ENTROPY_ATOL:
                raise ValueError(f"node {nid}: vol {node.vol} != children sum {child_vol}")
        if node.parent is not None:
            parent = tree.nodes[node.parent]
            if nid not in parent.children:
                raise ValueError(f"node {nid} missing from parent's child list")
            if node.vol - parent.vol > ENTROPY_ATOL:
                raise ValueError(f"node {nid}: vol exceeds parent vol")
            if node.vol <= 0 and not (node.is_leaf or node.vol == 0.0):
                raise ValueError(f"node {nid}: non-positive vol {node.vol}")


def one_level_tree(graph: Graph) -> EncodingTree:
    """Root with every vertex as a direct leaf child; height 1."""
    if graph.volume <= 0:
        raise DegenerateGraphError("graph has no edges; one-level tree undefined")
    tree = EncodingTree()
    # Leaf ids coincide with vertex ids; the root takes the next id.
    for v in range(graph.vertex_count):
        tree.new_node(parent=None, leaf_vertex=v, vol=graph.degree[v], cut=graph.degree[v])
    root = tree.new_node(parent=None, vol=graph.volume, cut=0.0)
    tree.root = root
    root_node = tree.nodes[root]
    for v in range(graph.vertex_count):
        tree.nodes[v].parent = root
        root_node.children.append(v)
    return tree


def entropy_term(cut: float, vol: float, parent_vol: float, total_vol: float) -> float:
    """One non-root node's contribution; exactly 0 when the cut is 0."""
    if cut == 0.0:
        return 0.0
    return -(cut / total_vol) * math.log2(vol / parent_vol)


def structural_entropy(graph: Graph, tree: EncodingTree) -> float:
    """Entropy of the graph on the tree, in bits; sums non-root terms in id order."""
    total = graph.volume
    if total <= 0:
        raise DegenerateGraphError("graph has no edges; entropy undefined")
    leaves = {tree.nodes[l].leaf_vertex for l in tree.leaf_ids()}
    if leaves != set(range(graph.vertex_count)):
        raise ValueError("tree leaves do not match graph vertices")
    bits = 0.0
    for nid in tree.node_ids():
        node = tree.nodes[nid]
        if node.parent is None:
            continue
        bits += entropy_term(node.cut, node.vol, tree.nodes[node.parent].vol, total)
    return bits


def degree_entropy(graph: Graph) -> float:
    """Closed form for the one-level tree: -sum d_v/vol * log2(d_v/vol).

    Independent of the tree machinery; used as an oracle against
    ``structural_entropy(one_level_tree(g))``.
    """
    total = graph.volume
    if total <= 0:
        raise DegenerateGraphError("graph has no edges; entropy undefined")
    bits = 0.0
    for d in graph.degree:
        if d > 0:
            bits -= (d / total) * math.log2(d / total)
    return bits


def recompute_caches(graph: Graph, tree: EncodingTree) -> EncodingTree:
    """Rebuild every vol/cut from scratch, in place; returns the tree.

    vol is a bottom-up child sum; cut accumulates each edge's weight onto all
    nodes strictly below the endpoints' lowest common ancestor.  Used as an
    oracle against the optimizer's incremental updates.
    """
    order = []
    stack = [tree.root]
    depth = {tree.root: 0}
    while stack:
        nid = stack.pop()
        order.append(nid)
        for c in tree.nodes[nid].children:
            depth[c] = depth[nid] + 1
            stack.append(c)
    leaf_of_vertex = {tree.nodes[l].leaf_vertex: l for l in tree.leaf_ids()}
    for nid in reversed(order):
        node = tree.nodes[nid]
        node.cut = 0.0
        if node.is_leaf:
            node.vol = graph.degree[node.leaf_vertex]
        else:
            node.vol = sum(tree.nodes[c].vol for c in node.children)
    for u, v, w in graph.edges:
        a, b = leaf_of_vertex[u], leaf_of_vertex[v]
        while a != b:
            if depth[a] < depth[b]:
                a, b = b, a
            tree.nodes[a].cut += w
            a = tree.nodes[a].parent
    return tree


def _set_partitions(items: list[int]):
    """Yield all partitions of ``items`` as lists of blocks (each a list)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partial in _set_partitions(rest):
        for i in range(len(partial)):
            yield partial[:i] + [[first] + partial[i]] + partial[i + 1:]
        yield [[first]] + partial


def _block_stats(graph: Graph, block: list[int]) -> tuple[float, float]:
    """(vol, cut) of a vertex subset."""
    members = set(block)
    vol = sum(graph.degree[v] for v in block)
    cut = 0.0
    for u, v, w in graph.edges:
        if (u in members) != (v in members):
            cut += w
    return vol, cut


def _partition_entropy(graph: Graph, blocks: list[list[int]], total: float,
                       parent_vol: float | None = None) -> float:
    """Entropy terms of a two-level subtree: module terms + leaf terms.

    ``parent_vol`` is the volume of the node the blocks hang from (vol(V)
    when they hang from the root).
    """
    if parent_vol is None:
        parent_vol = total
    bits = 0.0
    for block in blocks:
        vol, cut = _block_stats(graph, block)
        bits += entropy_term(cut, vol, parent_vol, total)
        for v in block:
            d = graph.degree[v]
            bits += entropy_term(d, d, vol, total)
    return bits


def tree_from_nested_blocks(graph: Graph, nested: list[list[list[int]]]) -> EncodingTree:
    """Build an explicit tree: root -> modules -> submodules -> leaves.

    ``nested[i]`` lists the sub-blocks of module i; a module whose only
    sub-block is itself yields leaves at depth 2.
    """
    tree = one_level_tree(graph)
    root = tree.root
    tree.nodes[root].children = []
    for sub_blocks in nested:
        all_vertices = [v for sb in sub_blocks for v in sb]
        vol, cut = _block_stats(graph, all_vertices)
        module = tree.new_node(parent=root, vol=vol, cut=cut)
        if len(sub_blocks) == 1 and sub_blocks[0] == all_vertices:
            for v in all_vertices:
                tree.nodes[v].parent = module
                tree.nodes[module].children.append(v)
            continue
        for sb in sub_blocks:
            svol, scut = _block_stats(graph, sb)
            sub = tree.new_node(parent=module, vol=svol, cut=scut)
            for v in sb:
                tree.nodes[v].parent = sub
                tree.nodes[sub].children.append(v)
    return tree


def brute_force_min_entropy(graph: Graph, k: int) -> tuple[EncodingTree, float]:
    """Exhaustive minimum over trees of height <= k; test oracle only.

    k=2 enumerates all set partitions of the vertices; k=3 additionally
    enumerates all sub-partitions of every block.  Guarded to n <= 9 and
    k in {2, 3}: the search space is exponential.
    """
    n = graph.vertex_count
    if n > BRUTE_FORCE_MAX_VERTICES:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_VERTICES}, got {n}")
    if k not in BRUTE_FORCE_HEIGHTS:
        raise ValueError(f"brute force limited to k in {BRUTE_FORCE_HEIGHTS}, got {k}")
    total = graph.volume
    if total <= 0:
        raise DegenerateGraphError("graph has no edges")

    vertices = list(range(n))
    best_bits = math.inf
    best_nested: list[list[list[int]]] | None = None

    for blocks in _set_partitions(vertices):
        if k == 2:
            bits = _partition_entropy(graph, blocks, total)
            if bits < best_bits - 1e-15:
                best_bits = bits
                best_nested = [[list(b)] for b in blocks]
        else:
            # Module terms are fixed per top partition; sub-partitions of each
            # block are independent, so minimize each block separately.
            bits = 0.0
            nested = []
            for block in blocks:
                vol, cut = _block_stats(graph, block)
                bits += entropy_term(cut, vol, total, total)
                best_sub_bits = math.inf
                best_sub = None
                for sub in _set_partitions(list(block)):
                    sub_bits = _partition_entropy(graph, sub, total, parent_vol=vol)
                    if sub_bits < best_sub_bits - 1e-15:
                        best_sub_bits = sub_bits
                        best_sub = [list(sb) for sb in sub]
                bits += best_sub_bits
                nested.append(best_sub)
            if bits < best_bits - 1e-15:
                best_bits = bits
                best_nested = nested

    tree = tree_from_nested_blocks(graph, best_nested)
    return tree, best_bits
