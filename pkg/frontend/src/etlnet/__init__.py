"""Neural classifier over exported encoding trees."""

from .data import FeatureEncoder, TreeRecord, load_dataset, read_features, read_trees
from .gradcheck import gradient_check
from .model import EtlModel, TreeBatch, build_batch
from .train import EtlReport, TrainConfig, TrainingDiverged, stratified_folds, train

__all__ = [
    "TreeRecord",
    "FeatureEncoder",
    "read_trees",
    "read_features",
    "load_dataset",
    "EtlModel",
    "TreeBatch",
    "build_batch",
    "gradient_check",
    "TrainConfig",
    "EtlReport",
    "TrainingDiverged",
    "stratified_folds",
    "train",
]

__version__ = "0.1.0"
