"""Finite-difference validation of the backward pass through tree batches."""

from __future__ import annotations

import torch
from torch import nn

from .model import EtlModel, TreeBatch


def gradient_check(model: EtlModel, batch: TreeBatch, eps: float = 1e-6) -> float:
    """Max relative error between analytic and central-difference gradients.

    Runs in double precision with batch-norm in evaluation mode (training-mode
    batch statistics would make the loss non-smooth in ways central
    differences cannot probe).
    """
    model = model.double()
    model.eval()
    batch = TreeBatch(
        height=batch.height,
        n_graphs=batch.n_graphs,
        leaf_features=batch.leaf_features.double(),
        parent_index=batch.parent_index,
        graph_index=batch.graph_index,
        targets=batch.targets,
    )
    loss_fn = nn.CrossEntropyLoss()

    def loss_value() -> torch.Tensor:
        return loss_fn(model(batch), batch.targets)

    model.zero_grad()
    loss_value().backward()
    worst = 0.0
    for param in model.parameters():
        analytic = (param.grad if param.grad is not None
                    else torch.zeros_like(param)).reshape(-1)
        flat = param.data.reshape(-1)
        for idx in range(flat.numel()):
            original = flat[idx].item()
            flat[idx] = original + eps
            upper = loss_value().item()
            flat[idx] = original - eps
            lower = loss_value().item()
            flat[idx] = original
            numeric = (upper - lower) / (2.0 * eps)
            a = analytic[idx].item()
            err = abs(a - numeric) / max(1.0, abs(a), abs(numeric))
            worst = max(worst, err)
    return worst
