"""Per-height MLP aggregation over encoding trees with layer-pooled readout.

Each height-i node's vector is a 2-layer MLP applied to the sum of its
children's height-(i-1) vectors, starting from one-hot leaf features; the
tree representation concatenates a pooled slot per height (0..h) and feeds
one linear classifier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

POOL_SUM = "sum"
POOL_MEAN = "mean"


@dataclass
class TreeBatch:
    """Flattened level-by-level view of a batch of uniform-height trees.

    ``parent_index[i]`` maps each height-(i-1) node row to its parent's row
    among the height-i nodes; ``graph_index[i]`` maps height-i node rows to
    the graph's position in the batch.  Row order is (graph, node id), so
    batches are deterministic.
    """

    height: int
    n_graphs: int
    leaf_features: torch.Tensor
    parent_index: list[torch.Tensor]
    graph_index: list[torch.Tensor]
    targets: torch.Tensor


def build_batch(records, features, classes, indices, dtype=torch.float32) -> TreeBatch:
    """Assemble the trees at ``indices`` into one flattened batch."""
    indices = list(indices)
    height = records[indices[0]].height
    rows_per_level: list[int] = [0] * (height + 1)
    row_of: list[dict[int, int]] = [dict() for _ in range(height + 1)]
    leaf_rows = []
    graph_index = [[] for _ in range(height + 1)]
    for pos, gi in enumerate(indices):
        rec = records[gi]
        if rec.height != height:
            raise ValueError(f"graph {rec.graph_index}: height {rec.height} != {height}")
        for nid in rec.node_ids:
            h = rec.node_height[nid]
            row_of[h][(pos, nid)] = rows_per_level[h]
            rows_per_level[h] += 1
            graph_index[h].append(pos)
        feats = features[gi]
        for nid in rec.node_ids:
            if rec.node_height[nid] == 0:
                vertex = rec.leaf_vertex.get(nid)
                if vertex is None or vertex >= len(feats):
                    raise ValueError(f"graph {rec.graph_index}: missing features for leaf {nid}")
                leaf_rows.append(feats[vertex])
    parent_index = [torch.empty(0, dtype=torch.long)]
    for h in range(1, height + 1):
        mapping = torch.empty(rows_per_level[h - 1], dtype=torch.long)
        for pos, gi in enumerate(indices):
            rec = records[gi]
            for nid in rec.node_ids:
                if rec.node_height[nid] == h - 1:
                    parent = rec.parent[nid]
                    mapping[row_of[h - 1][(pos, nid)]] = row_of[h][(pos, parent)]
        parent_index.append(mapping)
    return TreeBatch(
        height=height,
        n_graphs=len(indices),
        leaf_features=torch.as_tensor(np.stack(leaf_rows), dtype=dtype),
        parent_index=parent_index,
        graph_index=[torch.as_tensor(g, dtype=torch.long) for g in graph_index],
        targets=torch.as_tensor(classes[indices], dtype=torch.long),
    )


class HeightMlp(nn.Module):
    """Two Linear->BatchNorm->ReLU blocks, one such MLP per tree height."""

    def __init__(self, in_dim: int, hidden_dim: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(in_dim, hidden_dim),
            nn.BatchNorm1d(hidden_dim),
            nn.ReLU(),
            nn.Linear(hidden_dim, hidden_dim),
            nn.BatchNorm1d(hidden_dim),
            nn.ReLU(),
        )

    def forward(self, x):
        return self.net(x)


class EtlModel(nn.Module):
    """h per-height MLPs, layer-pooled concatenated readout, linear classifier."""

    def __init__(self, height: int, feature_dim: int, hidden_dim: int,
                 n_classes: int, layer_pool: str = POOL_SUM, dropout: float = 0.0):
        super().__init__()
        if layer_pool not in (POOL_SUM, POOL_MEAN):
            raise ValueError(f"unknown layer pool {layer_pool!r}")
        self.height = height
        self.feature_dim = feature_dim
        self.hidden_dim = hidden_dim
        self.layer_pool = layer_pool
        self.mlps = nn.ModuleList(
            [HeightMlp(feature_dim if i == 1 else hidden_dim, hidden_dim)
             for i in range(1, height + 1)]
        )
        self.dropout = nn.Dropout(dropout)
        readout_dim = feature_dim + height * hidden_dim
        self.classifier = nn.Linear(readout_dim, n_classes)

    def _pool(self, vectors: torch.Tensor, graph_index: torch.Tensor, n_graphs: int):
        pooled = vectors.new_zeros((n_graphs, vectors.shape[1]))
        pooled.index_add_(0, graph_index, vectors)
        if self.layer_pool == POOL_MEAN:
            counts = vectors.new_zeros(n_graphs)
            counts.index_add_(0, graph_index, torch.ones_like(graph_index, dtype=vectors.dtype))
            pooled = pooled / counts.clamp(min=1.0).unsqueeze(1)
        return pooled

    def readout(self, batch: TreeBatch) -> torch.Tensor:
        if batch.height != self.height:
            raise ValueError(f"batch height {batch.height} != model height {self.height}")
        if batch.leaf_features.shape[1] != self.feature_dim:
            raise ValueError("leaf feature width does not match the model")
        r = batch.leaf_features
        slots = [self._pool(r, batch.graph_index[0], batch.n_graphs)]
        for i in range(1, self.height + 1):
            n_parents = len(batch.graph_index[i])
            summed = r.new_zeros((n_parents, r.shape[1]))
            summed.index_add_(0, batch.parent_index[i], r)
            r = self.mlps[i - 1](summed)
            slots.append(self._pool(r, batch.graph_index[i], batch.n_graphs))
        return torch.cat(slots, dim=1)

    def forward(self, batch: TreeBatch) -> torch.Tensor:
        return self.classifier(self.dropout(self.readout(batch)))
