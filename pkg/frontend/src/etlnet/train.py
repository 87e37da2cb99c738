"""Cross-validated training loop for the tree network.

The fold protocol mirrors the kernel pipeline's: per-class seeded shuffle,
round-robin dealing, 10 folds.  The epoch count is selected by the best
mean test accuracy across folds, and the report carries that epoch's folds.
"""

from __future__ import annotations

import random
import warnings
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .model import POOL_SUM, EtlModel, TreeBatch, build_batch


class TrainingDiverged(RuntimeError):
    def __init__(self, fold: int, epoch: int):
        super().__init__(f"loss became non-finite in fold {fold} at epoch {epoch}")
        self.fold = fold
        self.epoch = epoch


@dataclass(frozen=True)
class TrainConfig:
    hidden_dim: int = 32
    batch_size: int = 32
    dropout: float = 0.0
    layer_pool: str = POOL_SUM
    lr: float = 0.01
    lr_halving_every: int = 50
    epochs: int = 300
    seed: int = 0
    n_folds: int = 10


@dataclass(frozen=True)
class EtlReport:
    fold_accuracies: tuple[float, ...]
    mean: float
    std: float
    chosen_epoch: int
    config: TrainConfig
    epoch_curve: tuple[float, ...] = field(repr=False)

    def to_text(self) -> str:
        cfg = self.config
        lines = [
            "etl-report",
            f"seed {cfg.seed}",
            f"folds {cfg.n_folds}",
            f"config hidden={cfg.hidden_dim} batch={cfg.batch_size} dropout={cfg.dropout!r} "
            f"pool={cfg.layer_pool} lr={cfg.lr!r} epochs={cfg.epochs}",
            f"chosen epoch={self.chosen_epoch}",
            "fold-accuracies " + " ".join(repr(a) for a in self.fold_accuracies),
            f"mean {self.mean!r}",
            f"std {self.std!r}",
            "epoch-curve " + " ".join(repr(a) for a in self.epoch_curve),
        ]
        return "\n".join(lines) + "\n"

    def summary_row(self, name: str) -> str:
        return (f"{name}: {100 * self.mean:.1f}+-{100 * self.std:.1f} "
                f"(epoch={self.chosen_epoch}, hidden={self.config.hidden_dim}, "
                f"pool={self.config.layer_pool}, seed={self.config.seed})")


def stratified_folds(classes: np.ndarray, n_folds: int, seed: int) -> list[np.ndarray]:
    """Same protocol as the kernel pipeline: per-class seeded shuffle, round-robin."""
    rng = random.Random(seed)
    fold_of = np.empty(len(classes), dtype=int)
    small = [int(c) for c in np.unique(classes) if int((classes == c).sum()) < n_folds]
    if small:
        warnings.warn(f"classes {small} have fewer than {n_folds} members; "
                      f"folds are best-effort stratified")
    cursor = 0
    for c in sorted(int(c) for c in np.unique(classes)):
        members = [int(i) for i in np.flatnonzero(classes == c)]
        rng.shuffle(members)
        for idx in members:
            fold_of[idx] = cursor % n_folds
            cursor += 1
    folds = [np.flatnonzero(fold_of == f) for f in range(n_folds)]
    return [f for f in folds if len(f)]


def _evaluate(model: EtlModel, batch: TreeBatch) -> float:
    model.eval()
    with torch.no_grad():
        predictions = model(batch).argmax(dim=1)
    return float((predictions == batch.targets).float().mean())


def _train_fold(records, features, classes, train_idx, test_idx, config: TrainConfig,
                fold: int, n_classes: int, feature_dim: int, height: int) -> list[float]:
    torch.manual_seed(config.seed * 1009 + fold)
    model = EtlModel(height=height, feature_dim=feature_dim,
                     hidden_dim=config.hidden_dim, n_classes=n_classes,
                     layer_pool=config.layer_pool, dropout=config.dropout)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    scheduler = torch.optim.lr_scheduler.StepLR(
        optimizer, step_size=config.lr_halving_every, gamma=0.5)
    loss_fn = nn.CrossEntropyLoss()
    shuffler = random.Random(config.seed * 9176 + fold)
    test_batch = build_batch(records, features, classes, test_idx)

    order = [int(i) for i in train_idx]
    accuracies = []
    for epoch in range(config.epochs):
        model.train()
        shuffler.shuffle(order)
        for start in range(0, len(order), config.batch_size):
            chunk = order[start:start + config.batch_size]
            if len(chunk) < 2:
                continue  # single-tree batches break batch-norm statistics
            batch = build_batch(records, features, classes, chunk)
            optimizer.zero_grad()
            loss = loss_fn(model(batch), batch.targets)
            if not torch.isfinite(loss):
                raise TrainingDiverged(fold, epoch)
            loss.backward()
            optimizer.step()
        scheduler.step()
        accuracies.append(_evaluate(model, test_batch))
    return accuracies


def train(records, features, classes, config: TrainConfig) -> EtlReport:
    """10-fold training; epoch chosen by the best mean accuracy across folds."""
    classes = np.asarray(classes, dtype=np.int64)
    n_classes = int(classes.max()) + 1
    feature_dim = features[0].shape[1]
    height = records[0].height
    folds = stratified_folds(classes, config.n_folds, config.seed)
    all_idx = np.arange(len(records))

    per_fold: list[list[float]] = []
    for fold, test_idx in enumerate(folds):
        train_idx = np.setdiff1d(all_idx, test_idx)
        per_fold.append(_train_fold(records, features, classes, train_idx, test_idx,
                                    config, fold, n_classes, feature_dim, height))
    curve = np.mean(np.asarray(per_fold), axis=0)
    chosen = int(np.argmax(curve))
    at_best = tuple(float(acc[chosen]) for acc in per_fold)
    return EtlReport(
        fold_accuracies=at_best,
        mean=float(np.mean(at_best)),
        std=float(np.std(at_best, ddof=1)) if len(at_best) > 1 else 0.0,
        chosen_epoch=chosen,
        config=config,
        epoch_curve=tuple(float(x) for x in curve),
    )
