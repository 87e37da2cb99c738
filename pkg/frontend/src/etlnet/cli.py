"""Command-line training entry point consuming the exported tree files."""

from __future__ import annotations

import argparse
import sys

from .data import load_dataset
from .model import POOL_MEAN, POOL_SUM
from .train import TrainConfig, TrainingDiverged, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="etlnet",
        description="Train the encoding-tree network on exported trees "
                    "plus their leaf-feature sidecar.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("train", help="10-fold cross-validated training")
    p.add_argument("trees", help="tree export file (JSON lines)")
    p.add_argument("features", help="leaf-feature sidecar file")
    p.add_argument("--hidden", type=int, default=32, choices=(16, 32, 64))
    p.add_argument("--batch-size", type=int, default=32, choices=(32, 128))
    p.add_argument("--dropout", type=float, default=0.0, choices=(0.0, 0.5))
    p.add_argument("--pool", choices=("auto", POOL_SUM, POOL_MEAN), default="auto",
                   help="auto pools by sum when categorical labels are present "
                        "(bioinformatics-style data), by mean otherwise")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="report output path")
    p.set_defaults(func=cmd_train)
    return parser


def cmd_train(args) -> int:
    records, features, classes, encoder = load_dataset(args.trees, args.features)
    pool = args.pool
    if pool == "auto":
        pool = POOL_SUM if encoder.category_values is not None else POOL_MEAN
    config = TrainConfig(
        hidden_dim=args.hidden,
        batch_size=args.batch_size,
        dropout=args.dropout,
        layer_pool=pool,
        lr=args.lr,
        epochs=args.epochs,
        seed=args.seed,
    )
    report = train(records, features, classes, config)
    out = args.out or f"{args.trees}.etl_report.txt"
    with open(out, "w") as fh:
        fh.write(report.to_text())
    print(report.summary_row(args.trees))
    print(f"report: {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"etlnet {args.command}: input error: {exc}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"etlnet {args.command}: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
