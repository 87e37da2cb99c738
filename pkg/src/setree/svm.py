"""Kernel SVM trained by sequential minimal optimization, plus the
10-fold cross-validation protocol used for whole-dataset evaluation.

The dual solver picks working sets with second-order selection, stops on
the maximal-violating-pair gap, and runs with shrinking disabled and
lowest-index tie-breaking, so results are deterministic.  Multiclass
problems reduce to one-vs-one voting.
"""

from __future__ import annotations

import math
import random
import warnings
from dataclasses import dataclass, field

import numpy as np

from .graphs import DEGREE, DEGREE_CATEGORY, Dataset, assign_initial_labels
from .kernel import (
    GAMMA_AUTO,
    GAMMA_SCALE,
    KernelMatrix,
    LabelDictionary,
    compute_feature_vectors,
    feature_csr,
    feature_matrix_variance,
    rbf_gram,
    resolve_gamma,
)
from .optimizer import build_trees_for_heights

KERNEL_LINEAR = "linear"
KERNEL_RBF_AUTO = "rbf-auto"
KERNEL_RBF_SCALE = "rbf-scale"
KERNEL_MODES = (KERNEL_LINEAR, KERNEL_RBF_AUTO, KERNEL_RBF_SCALE)

DEFAULT_C_GRID = (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)
DEFAULT_HEIGHTS = (2, 3, 4, 5)

_BOUND_EPS = 1e-12


class ConvergenceError(RuntimeError):
    """SMO hit its step cap; carries the best iterate's diagnostics."""

    def __init__(self, message: str, gap: float, steps: int):
        super().__init__(message)
        self.gap = gap
        self.steps = steps


@dataclass
class SvmModel:
    """Dual solution restricted to its support set.

    ``dual_coef[i]`` is alpha_i * y_i for the i-th support vector, so a
    decision value is kernel_row @ dual_coef + bias.
    """

    dual_coef: np.ndarray
    bias: float
    support_indices: np.ndarray
    C: float
    kernel_mode: str
    kkt_gap: float

    @property
    def n_support(self) -> int:
        return len(self.support_indices)


def smo_train(gram: np.ndarray, labels: np.ndarray, C: float, tol: float = 1e-3,
              max_steps: int = 10 ** 6, kernel_mode: str = KERNEL_LINEAR) -> SvmModel:
    """Solve the C-SVM dual on a precomputed Gram block.

    ``labels`` must be +/-1 with at least one example of each sign.  Working
    sets use second-order selection (the first index maximizes the KKT
    violation, the second maximizes the guaranteed objective decrease);
    convergence is declared when the maximal-violating-pair gap drops to
    ``tol``.  Ties resolve to the lowest index, so runs are deterministic.
    """
    K = np.asarray(gram, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    n = len(y)
    if K.shape != (n, n):
        raise ValueError(f"gram block {K.shape} does not match {n} labels")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be +1 or -1")
    if np.all(y == 1.0) or np.all(y == -1.0):
        raise ValueError("need at least one example per class")

    bound_eps = _BOUND_EPS * max(1.0, C)
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 0.5 a'Qa - e'a at a = 0
    gap = math.inf

    for step in range(max_steps):
        violation = -y * grad
        up = ((y > 0) & (alpha < C - bound_eps)) | ((y < 0) & (alpha > bound_eps))
        low = ((y > 0) & (alpha > bound_eps)) | ((y < 0) & (alpha < C - bound_eps))
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.argmax(np.where(up, violation, -np.inf)))
        gap = violation[i] - np.min(np.where(low, violation, np.inf))
        if gap <= tol:
            break

        col_i = K[:, i]
        b = violation[i] - violation
        quad = diag[i] + diag - 2.0 * col_i
        np.clip(quad, 1e-12, None, out=quad)
        candidates = low & (b > 0.0)
        j = int(np.argmin(np.where(candidates, -(b * b) / quad, np.inf)))

        t = b[j] / quad[j]
        t = min(t, C - alpha[i] if y[i] > 0 else alpha[i])
        t = min(t, alpha[j] if y[j] > 0 else C - alpha[j])
        alpha[i] += y[i] * t
        alpha[j] -= y[j] * t
        grad += t * y * (col_i - K[:, j])
    else:
        raise ConvergenceError(
            f"SMO did not converge in {max_steps} steps (KKT gap {gap:.3e} > tol {tol:.0e})",
            gap=gap, steps=max_steps,
        )

    violation = -y * grad
    free = (alpha > bound_eps) & (alpha < C - bound_eps)
    if free.any():
        bias = float(violation[free].mean())
    else:
        up = ((y > 0) & (alpha < C - bound_eps)) | ((y < 0) & (alpha > bound_eps))
        low = ((y > 0) & (alpha > bound_eps)) | ((y < 0) & (alpha < C - bound_eps))
        hi = violation[up].max() if up.any() else 0.0
        lo = violation[low].min() if low.any() else 0.0
        bias = float((hi + lo) / 2.0)

    support = np.flatnonzero(alpha > bound_eps)
    return SvmModel(
        dual_coef=alpha[support] * y[support],
        bias=bias,
        support_indices=support,
        C=C,
        kernel_mode=kernel_mode,
        kkt_gap=float(max(gap, 0.0)),
    )


def predict(model: SvmModel, kernel_row: np.ndarray) -> float:
    """Decision value for one example from its kernel row vs the support set."""
    row = np.asarray(kernel_row, dtype=np.float64)
    if row.shape != (model.n_support,):
        raise ValueError(f"kernel row has {row.shape} values for {model.n_support} support vectors")
    return float(row @ model.dual_coef + model.bias)


def decision_function(model: SvmModel, kernel_rows: np.ndarray) -> np.ndarray:
    """Decision values for rows of k(x, support vectors)."""
    rows = np.asarray(kernel_rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.n_support:
        raise ValueError(f"kernel rows {rows.shape} do not match {model.n_support} support vectors")
    return rows @ model.dual_coef + model.bias


def dual_objective(gram: np.ndarray, labels: np.ndarray, model: SvmModel) -> float:
    """Dual objective value of the model's solution on its training block."""
    n = len(labels)
    coef = np.zeros(n)
    coef[model.support_indices] = model.dual_coef  # alpha * y
    alpha = coef * labels
    return float(alpha.sum() - 0.5 * coef @ np.asarray(gram) @ coef)


@dataclass
class OvoModel:
    """One binary SVM per class pair, voting at prediction time."""

    classes: tuple[int, ...]
    pair_models: dict[tuple[int, int], SvmModel]
    pair_member_indices: dict[tuple[int, int], np.ndarray]


def train_ovo(gram: np.ndarray, classes: np.ndarray, C: float, tol: float = 1e-3,
              kernel_mode: str = KERNEL_LINEAR) -> OvoModel:
    present = tuple(sorted(int(c) for c in np.unique(classes)))
    pair_models, pair_members = {}, {}
    for ai in range(len(present)):
        for bi in range(ai + 1, len(present)):
            a, b = present[ai], present[bi]
            members = np.flatnonzero((classes == a) | (classes == b))
            y = np.where(classes[members] == a, 1.0, -1.0)
            sub = gram[np.ix_(members, members)]
            pair_models[(a, b)] = smo_train(sub, y, C, tol=tol, kernel_mode=kernel_mode)
            pair_members[(a, b)] = members
    return OvoModel(classes=present, pair_models=pair_models,
                    pair_member_indices=pair_members)


def predict_ovo(model: OvoModel, kernel_rows: np.ndarray) -> np.ndarray:
    """Majority vote across pair classifiers; ties go to the smallest class."""
    n = kernel_rows.shape[0]
    if len(model.classes) == 1:
        return np.full(n, model.classes[0], dtype=int)
    votes = np.zeros((n, len(model.classes)), dtype=int)
    position = {c: i for i, c in enumerate(model.classes)}
    for (a, b), pair_model in model.pair_models.items():
        members = model.pair_member_indices[(a, b)]
        support_abs = members[pair_model.support_indices]
        scores = decision_function(pair_model, kernel_rows[:, support_abs])
        votes[scores > 0, position[a]] += 1
        votes[scores <= 0, position[b]] += 1
    winners = np.argmax(votes, axis=1)  # first maximum: smallest class wins ties
    return np.asarray([model.classes[w] for w in winners], dtype=int)


def stratified_folds(classes: np.ndarray, n_folds: int, seed: int) -> list[np.ndarray]:
    """Seeded stratified split; classes smaller than n_folds degrade gracefully."""
    rng = random.Random(seed)
    fold_of = np.empty(len(classes), dtype=int)
    small = [int(c) for c in np.unique(classes)
             if int((classes == c).sum()) < n_folds]
    if small:
        warnings.warn(
            f"classes {small} have fewer than {n_folds} members; "
            f"folds are best-effort stratified"
        )
    cursor = 0
    for c in sorted(int(c) for c in np.unique(classes)):
        members = [int(i) for i in np.flatnonzero(classes == c)]
        rng.shuffle(members)
        for idx in members:
            fold_of[idx] = cursor % n_folds
            cursor += 1
    folds = [np.flatnonzero(fold_of == f) for f in range(n_folds)]
    return [f for f in folds if len(f)]  # tiny datasets leave some folds empty


@dataclass(frozen=True)
class GridPoint:
    height: int
    kernel_mode: str
    C: float
    fold_accuracies: tuple[float, ...]

    @property
    def mean(self) -> float:
        return float(np.mean(self.fold_accuracies))

    @property
    def std(self) -> float:
        return float(np.std(self.fold_accuracies, ddof=1)) if len(self.fold_accuracies) > 1 else 0.0


@dataclass(frozen=True)
class CvReport:
    """Best grid point's folds plus the full grid for auditability."""

    fold_accuracies: tuple[float, ...]
    mean: float
    std: float
    chosen_c: float
    chosen_height: int
    chosen_kernel_mode: str
    seed: int
    label_mode: str
    grid: tuple[GridPoint, ...] = field(repr=False)

    def to_text(self) -> str:
        lines = [
            "cv-report",
            f"seed {self.seed}",
            f"folds {len(self.fold_accuracies)}",
            f"label-mode {self.label_mode}",
            f"chosen height={self.chosen_height} kernel={self.chosen_kernel_mode} C={self.chosen_c!r}",
            "fold-accuracies " + " ".join(repr(a) for a in self.fold_accuracies),
            f"mean {self.mean!r}",
            f"std {self.std!r}",
        ]
        for gp in self.grid:
            lines.append(
                f"grid height={gp.height} kernel={gp.kernel_mode} C={gp.C!r} "
                f"mean={gp.mean!r} std={gp.std!r} "
                "folds=" + ",".join(repr(a) for a in gp.fold_accuracies)
            )
        return "\n".join(lines) + "\n"

    def summary_row(self, dataset_name: str) -> str:
        return (f"{dataset_name}: {100 * self.mean:.1f}+-{100 * self.std:.1f} "
                f"(height={self.chosen_height}, kernel={self.chosen_kernel_mode}, "
                f"C={self.chosen_c:g}, seed={self.seed})")


def parse_cv_report(text: str) -> dict:
    """Light parser for the to_text format (used by tooling and tests)."""
    out: dict = {"grid": []}
    for line in text.strip().splitlines()[1:]:
        key, _, rest = line.partition(" ")
        if key == "fold-accuracies":
            out[key] = tuple(float(x) for x in rest.split())
        elif key in ("mean", "std"):
            out[key] = float(rest)
        elif key in ("seed", "folds"):
            out[key] = int(rest)
        elif key == "grid":
            out["grid"].append(rest)
        else:
            out[key] = rest
    return out


def auto_label_mode(dataset: Dataset) -> str:
    if all(g.categorical_label is not None for g in dataset.graphs):
        return DEGREE_CATEGORY
    return DEGREE


def features_and_grams(trees, labelings, kernel_modes, normalize: bool = False):
    """Feature vectors plus one Gram matrix per kernel mode (one reporting pass)."""
    dictionary = LabelDictionary()
    fvs = compute_feature_vectors(trees, labelings, dictionary)
    X = feature_csr(fvs)
    if normalize:
        from scipy import sparse

        norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
        norms[norms == 0] = 1.0
        X = sparse.diags(1.0 / norms) @ X
    linear = KernelMatrix(values=np.asarray((X @ X.T).toarray(), dtype=np.float64))
    grams = {}
    for mode in kernel_modes:
        if mode == KERNEL_LINEAR:
            grams[mode] = linear.values
        elif mode in (KERNEL_RBF_AUTO, KERNEL_RBF_SCALE):
            policy = GAMMA_AUTO if mode == KERNEL_RBF_AUTO else GAMMA_SCALE
            gamma = resolve_gamma(policy, len(dictionary), feature_matrix_variance(X))
            grams[mode] = rbf_gram(linear, gamma).values
        else:
            raise ValueError(f"unknown kernel mode {mode!r}")
    return fvs, grams


def grams_for_height(dataset: Dataset, trees, labelings, kernel_modes,
                     normalize: bool = False) -> dict[str, np.ndarray]:
    """Gram matrix per requested kernel mode, sharing one reporting pass."""
    _, grams = features_and_grams(trees, labelings, kernel_modes, normalize=normalize)
    return grams


def cross_validate(
    dataset: Dataset,
    heights=DEFAULT_HEIGHTS,
    c_grid=DEFAULT_C_GRID,
    kernel_modes=(KERNEL_LINEAR,),
    seed: int = 0,
    n_folds: int = 10,
    label_mode: str | None = None,
    normalize: bool = False,
    tol: float = 1e-3,
) -> CvReport:
    """Stratified k-fold accuracy over the (height, kernel, C) grid.

    Folds are fixed across the whole grid; the report carries the best grid
    point's folds and the complete grid.  Bit-reproducible for a fixed seed.
    """
    heights = tuple(int(k) for k in heights)
    if label_mode is None:
        label_mode = auto_label_mode(dataset)
    labelings = assign_initial_labels(dataset, label_mode)
    classes = np.asarray([g.graph_class for g in dataset.graphs], dtype=int)
    folds = stratified_folds(classes, n_folds, seed)
    all_indices = np.arange(len(dataset.graphs))

    trees_by_height = {k: [] for k in heights}
    for g in dataset.graphs:
        built = build_trees_for_heights(g, heights)
        for k in heights:
            trees_by_height[k].append(built[k])

    grid: list[GridPoint] = []
    for k in heights:
        grams = grams_for_height(dataset, trees_by_height[k], labelings,
                                 kernel_modes, normalize=normalize)
        for mode in kernel_modes:
            gram = grams[mode]
            accuracies = {C: [] for C in c_grid}
            for test_idx in folds:  # one gram slice per fold, shared by the C grid
                train_idx = np.setdiff1d(all_indices, test_idx)
                train_block = gram[np.ix_(train_idx, train_idx)]
                test_rows = gram[test_idx]
                for C in c_grid:
                    model = train_ovo(train_block, classes[train_idx], C,
                                      tol=tol, kernel_mode=mode)
                    remapped = OvoModel(
                        classes=model.classes,
                        pair_models=model.pair_models,
                        pair_member_indices={
                            pair: train_idx[members]
                            for pair, members in model.pair_member_indices.items()
                        },
                    )
                    predicted = predict_ovo(remapped, test_rows)
                    accuracies[C].append(float(np.mean(predicted == classes[test_idx])))
            for C in c_grid:
                grid.append(GridPoint(height=k, kernel_mode=mode, C=float(C),
                                      fold_accuracies=tuple(accuracies[C])))

    best = grid[0]
    for gp in grid[1:]:
        if gp.mean > best.mean:
            best = gp
    return CvReport(
        fold_accuracies=best.fold_accuracies,
        mean=best.mean,
        std=best.std,
        chosen_c=best.C,
        chosen_height=best.height,
        chosen_kernel_mode=best.kernel_mode,
        seed=seed,
        label_mode=label_mode,
        grid=tuple(grid),
    )
