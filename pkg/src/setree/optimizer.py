"""Greedy construction of height-bounded low-entropy encoding trees.

Two phases: bottom-up binary merging of root children (every fusion of an
edge-connected pair weakly lowers the entropy; the greedy takes the largest
drop first), then height compression (repeatedly splice out the internal
node whose removal costs the least entropy until the height bound holds).
Shallow leaves are finally lifted to uniform depth with entropy-neutral
unary chains.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .entropy import (
    EncodingTree,
    entropy_term,
    one_level_tree,
    structural_entropy,
)
from .graphs import DegenerateGraphError, Graph

TIE_BREAK_MIN_PAIR = "min-pair"


@dataclass(frozen=True)
class OptimizerConfig:
    """Target height k >= 2 plus determinism/bookkeeping knobs."""

    k: int = 2
    tie_break: str = TIE_BREAK_MIN_PAIR
    report_stats: bool = True

    def __post_init__(self):
        if self.k < 2:
            raise ValueError(f"target height must be >= 2, got {self.k}")
        if self.tie_break != TIE_BREAK_MIN_PAIR:
            raise ValueError(f"unknown tie-break rule {self.tie_break!r}")


@dataclass
class OptimizerStats:
    merge_steps: int = 0
    compress_steps: int = 0
    max_intermediate_height: int = 0
    entropy_trace: list[float] = field(default_factory=list)


def _fusion_delta(vol_a: float, cut_a: float, vol_b: float, cut_b: float,
                  cut_ab: float, total: float) -> float:
    """Entropy change from fusing two root children under a new common parent.

    Only the three affected terms are re-evaluated: the new parent's term
    against the root, and the two fused nodes' terms against the new parent.
    """
    vol_c = vol_a + vol_b
    cut_c = cut_a + cut_b - 2.0 * cut_ab
    new = (entropy_term(cut_c, vol_c, total, total)
           + entropy_term(cut_a, vol_a, vol_c, total)
           + entropy_term(cut_b, vol_b, vol_c, total))
    old = (entropy_term(cut_a, vol_a, total, total)
           + entropy_term(cut_b, vol_b, total, total))
    return new - old


def _removal_delta(tree: EncodingTree, nid: int, total: float) -> float:
    """Entropy change from splicing node ``nid``'s children onto its parent."""
    node = tree.nodes[nid]
    parent = tree.nodes[node.parent]
    old = entropy_term(node.cut, node.vol, parent.vol, total)
    new = 0.0
    for c in node.children:
        child = tree.nodes[c]
        old += entropy_term(child.cut, child.vol, node.vol, total)
        new += entropy_term(child.cut, child.vol, parent.vol, total)
    return new - old


def merge_phase(graph: Graph, stats: OptimizerStats | None = None) -> EncodingTree:
    """Binary bottom-up agglomeration of the one-level tree's root children.

    Candidates are pairs of root children joined by at least one graph edge
    (fusing a non-adjacent pair cannot lower the entropy).  The pair with the
    lowest fusion delta is merged first; ties break on the (min id, max id)
    pair key.  Every fusion of adjacent children of the root is weakly
    entropy-decreasing, so the greedy runs until one spanning child remains;
    the final fusion is always neutral and the compression phase removes the
    resulting wrapper for free whenever the height budget demands it.
    """
    if graph.volume <= 0:
        raise DegenerateGraphError("graph has no edges")
    if not graph.is_connected():
        raise ValueError("merge phase requires a connected graph")

    tree = one_level_tree(graph)
    root = tree.root
    total = graph.volume

    live: set[int] = set(range(graph.vertex_count))
    child_h: dict[int, int] = {v: 0 for v in live}
    # Contracted-graph adjacency among live root children, kept symmetric.
    nbrs: dict[int, dict[int, float]] = {v: {} for v in live}
    for u, v, w in graph.edges:
        nbrs[u][v] = nbrs[u].get(v, 0.0) + w
        nbrs[v][u] = nbrs[v].get(u, 0.0) + w

    heap: list[tuple[float, int, int, float]] = []
    for u in sorted(live):
        node_u = tree.nodes[u]
        for v, w in sorted(nbrs[u].items()):
            if v > u:
                node_v = tree.nodes[v]
                delta = _fusion_delta(node_u.vol, node_u.cut, node_v.vol, node_v.cut, w, total)
                heap.append((delta, u, v, w))
    heapq.heapify(heap)

    while len(live) > 1:
        if not heap:
            raise RuntimeError("merge heap exhausted on a connected graph")
        delta, a, b, cut_ab = heapq.heappop(heap)
        if a not in live or b not in live:
            continue
        na, nb = tree.nodes[a], tree.nodes[b]
        c = tree.new_node(parent=None, vol=na.vol + nb.vol,
                          cut=na.cut + nb.cut - 2.0 * cut_ab)
        nc = tree.nodes[c]
        nc.children = [a, b]
        na.parent = c
        nb.parent = c
        live.discard(a)
        live.discard(b)
        live.add(c)
        child_h[c] = max(child_h[a], child_h[b]) + 1

        merged = nbrs.pop(a)
        other = nbrs.pop(b)
        if len(merged) < len(other):
            merged, other = other, merged
        for u, w in other.items():
            merged[u] = merged.get(u, 0.0) + w
        merged.pop(a, None)
        merged.pop(b, None)
        nbrs[c] = merged
        for u, w in merged.items():
            ud = nbrs[u]
            ud.pop(a, None)
            ud.pop(b, None)
            ud[c] = w
            nu = tree.nodes[u]
            d = _fusion_delta(nc.vol, nc.cut, nu.vol, nu.cut, w, total)
            heapq.heappush(heap, (d, min(c, u), max(c, u), w))

        if stats is not None:
            stats.merge_steps += 1
            if stats.entropy_trace:
                stats.entropy_trace.append(stats.entropy_trace[-1] + delta)

    root_node = tree.nodes[root]
    root_node.children = sorted(live)
    for nid in root_node.children:
        tree.nodes[nid].parent = root
    if stats is not None:
        height = 1 + max((child_h[nid] for nid in live), default=0)
        stats.max_intermediate_height = max(stats.max_intermediate_height, height)
    return tree


def compress_phase(tree: EncodingTree, k: int,
                   stats: OptimizerStats | None = None) -> EncodingTree:
    """Splice out internal nodes until every leaf sits at depth <= k.

    Candidates are non-root internal nodes lying on a root-to-leaf path
    longer than k; the one whose removal raises the entropy least goes first
    (ties on node id).  A stale-entry heap tracks deltas: an entry is dropped
    when its node died or its parent/children changed since the push.
    """
    if k < 1:
        raise ValueError(f"height bound must be >= 1, got {k}")
    total = tree.nodes[tree.root].vol

    child_h: dict[int, int] = {}
    order = []
    stack = [tree.root]
    while stack:
        nid = stack.pop()
        order.append(nid)
        stack.extend(tree.nodes[nid].children)
    for nid in reversed(order):
        node = tree.nodes[nid]
        child_h[nid] = 1 + max((child_h[c] for c in node.children), default=-1)

    gen: dict[int, int] = {nid: 0 for nid in tree.nodes}
    heap: list[tuple[float, int, int]] = []

    def push(nid: int) -> None:
        node = tree.nodes.get(nid)
        if node is None or node.parent is None or not node.children:
            return
        heapq.heappush(heap, (_removal_delta(tree, nid, total), nid, gen[nid]))

    for nid in tree.node_ids():
        push(nid)

    def on_long_path(nid: int) -> bool:
        depth = 0
        walk = tree.nodes[nid]
        while walk.parent is not None:
            walk = tree.nodes[walk.parent]
            depth += 1
        return depth + child_h[nid] > k

    while child_h[tree.root] > k:
        if not heap:
            raise RuntimeError("compression ran out of removable nodes")
        delta, nid, entry_gen = heapq.heappop(heap)
        if nid not in tree.nodes or entry_gen != gen[nid]:
            continue
        node = tree.nodes[nid]
        if node.parent is None or not node.children:
            continue
        if not on_long_path(nid):
            continue

        parent = tree.nodes[node.parent]
        idx = parent.children.index(nid)
        parent.children[idx:idx + 1] = node.children
        for c in node.children:
            tree.nodes[c].parent = parent.id
            gen[c] += 1
            push(c)
        del tree.nodes[nid]
        del gen[nid]
        gen[parent.id] += 1
        push(parent.id)

        walk = parent.id
        while walk is not None:
            new_h = 1 + max(child_h[c] for c in tree.nodes[walk].children)
            if new_h == child_h[walk]:
                break
            child_h[walk] = new_h
            walk = tree.nodes[walk].parent

        if stats is not None:
            stats.compress_steps += 1
            if stats.entropy_trace:
                stats.entropy_trace.append(stats.entropy_trace[-1] + delta)
    return tree


def pad_to_height(tree: EncodingTree, k: int) -> EncodingTree:
    """Insert unary chain nodes above shallow leaves so all sit at depth k.

    Each inserted node copies the leaf's vol and cut, so every new term is 0
    or replicates an existing log ratio: the entropy is unchanged exactly.
    """
    height = tree.height()
    if height > k:
        raise ValueError(f"tree height {height} exceeds target {k}; compress first")
    for leaf in tree.leaf_ids():
        node = tree.nodes[leaf]
        for _ in range(k - tree.depth(leaf)):
            parent = tree.nodes[node.parent]
            chain = tree.new_node(parent=None, vol=node.vol, cut=node.cut)
            chain_node = tree.nodes[chain]
            chain_node.parent = parent.id
            chain_node.children = [leaf]
            parent.children[parent.children.index(leaf)] = chain
            node.parent = chain
    return tree


def optimize_encoding_tree(graph: Graph, config: OptimizerConfig) -> tuple[EncodingTree, OptimizerStats]:
    """Full pipeline for a connected graph: merge, compress to k, pad to k."""
    if graph.volume <= 0:
        raise DegenerateGraphError("graph has no edges")
    stats = OptimizerStats()
    if config.report_stats:
        stats.entropy_trace.append(structural_entropy(graph, one_level_tree(graph)))
    tree = merge_phase(graph, stats)
    compress_phase(tree, config.k, stats)
    pad_to_height(tree, config.k)
    return tree, stats


def optimize_disconnected(graph: Graph, config: OptimizerConfig) -> tuple[EncodingTree, OptimizerStats]:
    """Optimize each connected component on its own, then merge the roots.

    Component trees are built independently (each against its own volume),
    their roots are dissolved into a single new global root, and isolated
    vertices hang directly under that root as zero-volume leaves contributing
    nothing to the entropy.  ``entropy_trace`` holds only the global
    before/after pair; per-step traces live in the per-component runs.
    """
    components = graph.connected_components()
    edge_components = [c for c in components if len(c) > 1]
    isolated = [c[0] for c in components if len(c) == 1]
    if not edge_components:
        raise DegenerateGraphError("graph has no edges")
    if len(components) == 1:
        return optimize_encoding_tree(graph, config)

    stats = OptimizerStats()
    tree = EncodingTree()
    for v in range(graph.vertex_count):
        tree.new_node(parent=None, leaf_vertex=v, vol=graph.degree[v], cut=graph.degree[v])
    root = tree.new_node(parent=None, vol=graph.volume, cut=0.0)
    tree.root = root

    for comp in edge_components:
        index_of = {v: i for i, v in enumerate(comp)}
        sub = Graph.from_edges(
            vertex_count=len(comp),
            edges=[(index_of[u], index_of[v], w) for u, v, w in graph.edges
                   if u in index_of and v in index_of],
        )
        sub_tree, sub_stats = optimize_encoding_tree(sub, config)
        stats.merge_steps += sub_stats.merge_steps
        stats.compress_steps += sub_stats.compress_steps
        stats.max_intermediate_height = max(stats.max_intermediate_height,
                                            sub_stats.max_intermediate_height)
        id_map: dict[int, int] = {}
        for nid in sub_tree.node_ids():
            node = sub_tree.nodes[nid]
            if node.is_leaf:
                id_map[nid] = comp[node.leaf_vertex]
            elif nid == sub_tree.root:
                id_map[nid] = root
            else:
                id_map[nid] = tree.new_node(parent=None, vol=node.vol, cut=node.cut)
        for nid in sub_tree.node_ids():
            node = sub_tree.nodes[nid]
            if nid == sub_tree.root:
                continue
            mapped = tree.nodes[id_map[nid]]
            mapped.parent = id_map[node.parent]
            tree.nodes[mapped.parent].children.append(id_map[nid])
            mapped.vol = node.vol
            mapped.cut = node.cut

    for v in isolated:
        tree.nodes[v].parent = root
        tree.nodes[root].children.append(v)

    pad_to_height(tree, config.k)
    if config.report_stats:
        stats.entropy_trace = [structural_entropy(graph, one_level_tree(graph)),
                               structural_entropy(graph, tree)]
    return tree, stats


def build_tree(graph: Graph, config: OptimizerConfig) -> tuple[EncodingTree, OptimizerStats]:
    """Route to the connected or disconnected pipeline as appropriate."""
    if graph.is_connected():
        return optimize_encoding_tree(graph, config)
    return optimize_disconnected(graph, config)


def build_trees_for_heights(graph: Graph, heights) -> dict[int, EncodingTree]:
    """One tree per height bound, sharing a single merge phase when connected.

    Identical output to running the full pipeline per height: the merge
    phase never looks at k.
    """
    out: dict[int, EncodingTree] = {}
    if graph.is_connected():
        base = merge_phase(graph)
        for k in sorted(set(int(k) for k in heights)):
            tree = base.copy()
            compress_phase(tree, k)
            pad_to_height(tree, k)
            out[k] = tree
    else:
        for k in sorted(set(int(k) for k in heights)):
            out[k], _ = optimize_disconnected(
                graph, OptimizerConfig(k=k, report_stats=False)
            )
    return out
