"""Command-line pipeline: ingest flat files, build trees, kernels, classify.

Subcommands: optimize | gram | classify | export.  Every run writes a JSON
manifest next to its outputs echoing the full configuration and per-stage
wall-clock timings, so a run can be reproduced from the manifest alone.
Exit codes: 0 ok, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import multiprocessing
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from functools import partial

from .entropy import degree_entropy, structural_entropy
from .graphs import Dataset, DatasetParseError, DegenerateGraphError, parse_tudataset
from .graphs import assign_initial_labels
from .kernel import KernelMatrix, write_feature_vectors, write_gram_matrix
from .optimizer import build_trees_for_heights
from .svm import (
    ConvergenceError,
    DEFAULT_C_GRID,
    DEFAULT_HEIGHTS,
    KERNEL_LINEAR,
    KERNEL_MODES,
    auto_label_mode,
    cross_validate,
    features_and_grams,
)
from .treeio import write_leaf_features, write_tree_export

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


@dataclass
class RunManifest:
    dataset_dir: str
    dataset_name: str
    command: str
    config: dict
    timings_ms: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)

    def write(self, anchor_path: str) -> str:
        path = anchor_path + ".manifest.json"
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


class _Timer:
    def __init__(self, manifest: RunManifest, stage: str):
        self.manifest = manifest
        self.stage = stage

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.manifest.timings_ms[self.stage] = round(
            (time.perf_counter() - self.start) * 1000.0, 3
        )
        return False


def _parse_heights(text: str) -> tuple[int, ...]:
    try:
        heights = tuple(int(tok) for tok in text.split(",") if tok)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad height list {text!r}") from None
    if not heights or any(k < 2 for k in heights):
        raise argparse.ArgumentTypeError("heights must be integers >= 2")
    return heights


def _parse_c_grid(text: str) -> tuple[float, ...]:
    try:
        grid = tuple(float(tok) for tok in text.split(",") if tok)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad C grid {text!r}") from None
    if not grid or any(c <= 0 for c in grid):
        raise argparse.ArgumentTypeError("C values must be positive")
    return grid


def _resolve_label_mode(dataset: Dataset, flag: str) -> str:
    return auto_label_mode(dataset) if flag == "auto" else flag


def _build_all_trees(dataset: Dataset, heights, threads: int):
    """Per-graph trees for every height; worker pool over graphs."""
    worker = partial(build_trees_for_heights, heights=heights)
    if threads > 1:
        with multiprocessing.Pool(threads) as pool:
            per_graph = pool.map(worker, dataset.graphs)
    else:
        per_graph = [worker(g) for g in dataset.graphs]
    return {k: [built[k] for built in per_graph] for k in heights}


def _load_dataset(args, manifest: RunManifest) -> Dataset:
    with _Timer(manifest, "parse"):
        return parse_tudataset(args.dataset_dir, args.name)


def cmd_optimize(args) -> int:
    out = args.out or f"{args.name}_trees_k{args.height}.jsonl"
    manifest = RunManifest(
        dataset_dir=args.dataset_dir, dataset_name=args.name, command="optimize",
        config={"height": args.height, "threads": args.threads, "out": out},
    )
    dataset = _load_dataset(args, manifest)
    with _Timer(manifest, "optimize"):
        trees = _build_all_trees(dataset, (args.height,), args.threads)[args.height]
    write_tree_export(out, trees, [g.graph_class for g in dataset.graphs])
    manifest.outputs.append(out)
    manifest_path = manifest.write(out)
    before = sum(degree_entropy(g) for g in dataset.graphs) / len(dataset.graphs)
    after = sum(structural_entropy(g, t) for g, t in zip(dataset.graphs, trees)) / len(dataset.graphs)
    print(f"{args.name}: {len(trees)} trees at height {args.height} -> {out}")
    print(f"mean entropy before/after optimization: {before:.4f} / {after:.4f} bits")
    print(f"manifest: {manifest_path}")
    return EXIT_OK


def cmd_gram(args) -> int:
    out = args.out or f"{args.name}_gram_k{args.height}_{args.kernel}.txt"
    manifest = RunManifest(
        dataset_dir=args.dataset_dir, dataset_name=args.name, command="gram",
        config={"height": args.height, "kernel": args.kernel, "labels": args.labels,
                "normalize": args.normalize, "threads": args.threads, "out": out,
                "features_out": args.features_out},
    )
    dataset = _load_dataset(args, manifest)
    label_mode = _resolve_label_mode(dataset, args.labels)
    labelings = assign_initial_labels(dataset, label_mode)
    with _Timer(manifest, "optimize"):
        trees = _build_all_trees(dataset, (args.height,), args.threads)[args.height]
    with _Timer(manifest, "kernel"):
        fvs, grams = features_and_grams(trees, labelings, (args.kernel,),
                                        normalize=args.normalize)
        gram = grams[args.kernel]
    write_gram_matrix(out, KernelMatrix(values=gram), args.name, args.kernel)
    manifest.outputs.append(out)
    if args.features_out:
        write_feature_vectors(args.features_out, fvs)
        manifest.outputs.append(args.features_out)
    manifest_path = manifest.write(out)
    print(f"{args.name}: {gram.shape[0]}x{gram.shape[1]} gram matrix ({args.kernel}) -> {out}")
    print(f"manifest: {manifest_path}")
    return EXIT_OK


def cmd_classify(args) -> int:
    out = args.out or f"{args.name}_cv_report.txt"
    manifest = RunManifest(
        dataset_dir=args.dataset_dir, dataset_name=args.name, command="classify",
        config={"heights": list(args.heights), "kernel": args.kernel,
                "c_grid": list(args.c_grid), "seed": args.seed, "labels": args.labels,
                "normalize": args.normalize, "threads": args.threads, "out": out},
    )
    dataset = _load_dataset(args, manifest)
    label_mode = _resolve_label_mode(dataset, args.labels)
    with _Timer(manifest, "train"):
        report = cross_validate(
            dataset,
            heights=args.heights,
            c_grid=args.c_grid,
            kernel_modes=(args.kernel,),
            seed=args.seed,
            label_mode=label_mode,
            normalize=args.normalize,
        )
    with open(out, "w") as fh:
        fh.write(report.to_text())
    manifest.outputs.append(out)
    manifest_path = manifest.write(out)
    print(report.summary_row(args.name))
    print(f"report: {out}")
    print(f"manifest: {manifest_path}")
    return EXIT_OK


def cmd_export(args) -> int:
    out = args.out or f"{args.name}_trees_k{args.height}.jsonl"
    features_out = args.features_out or out + ".features"
    manifest = RunManifest(
        dataset_dir=args.dataset_dir, dataset_name=args.name, command="export",
        config={"height": args.height, "labels": args.labels,
                "threads": args.threads, "out": out, "features_out": features_out},
    )
    dataset = _load_dataset(args, manifest)
    label_mode = _resolve_label_mode(dataset, args.labels)
    with _Timer(manifest, "optimize"):
        trees = _build_all_trees(dataset, (args.height,), args.threads)[args.height]
    write_tree_export(out, trees, [g.graph_class for g in dataset.graphs])
    write_leaf_features(features_out, list(dataset.graphs),
                        include_category=label_mode == "degree-category")
    manifest.outputs.extend([out, features_out])
    manifest_path = manifest.write(out)
    print(f"{args.name}: trees -> {out}; leaf features -> {features_out}")
    print(f"manifest: {manifest_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="setree",
        description="Minimum-entropy encoding trees, tree kernels and SVM classification "
                    "for graph datasets in the flat TU file layout.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("dataset_dir", help="directory with the <name>_*.txt files")
        p.add_argument("name", help="dataset name (file prefix)")
        p.add_argument("--labels", choices=("auto", "degree", "degree-category"),
                       default="auto", help="initial vertex labeling mode")
        p.add_argument("--threads", type=int, default=1,
                       help="worker processes for per-graph tree construction")
        p.add_argument("--out", default=None, help="output path")

    p_opt = sub.add_parser("optimize", help="build and export encoding trees")
    common(p_opt)
    p_opt.add_argument("--height", type=int, default=2, help="tree height bound k")
    p_opt.set_defaults(func=cmd_optimize)

    p_gram = sub.add_parser("gram", help="write the kernel Gram matrix")
    common(p_gram)
    p_gram.add_argument("--height", type=int, default=2)
    p_gram.add_argument("--kernel", choices=KERNEL_MODES, default=KERNEL_LINEAR)
    p_gram.add_argument("--normalize", action="store_true",
                        help="L2-normalize feature vectors before the kernel")
    p_gram.add_argument("--features-out", default=None, dest="features_out",
                        help="also write per-graph height:label:count triples")
    p_gram.set_defaults(func=cmd_gram)

    p_cls = sub.add_parser("classify", help="10-fold cross-validated SVM accuracy")
    common(p_cls)
    p_cls.add_argument("--heights", type=_parse_heights, default=DEFAULT_HEIGHTS,
                       help="comma-separated tree heights to grid over")
    p_cls.add_argument("--kernel", choices=KERNEL_MODES, default=KERNEL_LINEAR)
    p_cls.add_argument("--c-grid", type=_parse_c_grid, default=DEFAULT_C_GRID,
                       dest="c_grid", help="comma-separated SVM C values")
    p_cls.add_argument("--seed", type=int, default=0, help="fold shuffle seed")
    p_cls.add_argument("--normalize", action="store_true")
    p_cls.set_defaults(func=cmd_classify)

    p_exp = sub.add_parser("export", help="export trees plus the leaf-feature sidecar")
    common(p_exp)
    p_exp.add_argument("--height", type=int, default=2)
    p_exp.add_argument("--features-out", default=None, dest="features_out")
    p_exp.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetParseError, DegenerateGraphError, FileNotFoundError, NotADirectoryError) as exc:
        print(f"setree {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvergenceError as exc:
        print(f"setree {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
