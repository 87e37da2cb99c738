"""Graph classification through minimum-entropy encoding trees.

Pipeline: parse a flat-file dataset, transform each graph into a low-entropy
encoding tree of bounded height, compare trees with a hierarchical label
kernel, and classify with a kernel SVM under cross-validation.
"""

from .entropy import (
    EncodingTree,
    brute_force_min_entropy,
    degree_entropy,
    one_level_tree,
    recompute_caches,
    structural_entropy,
)
from .graphs import (
    Dataset,
    DatasetParseError,
    DegenerateGraphError,
    Graph,
    InitialLabeling,
    assign_initial_labels,
    parse_tudataset,
    write_tudataset,
)
from .kernel import (
    FeatureVector,
    KernelMatrix,
    LabelDictionary,
    gram_matrix,
    hierarchical_reporting,
    kernel_value,
    rbf_on_features,
)
from .optimizer import (
    OptimizerConfig,
    OptimizerStats,
    build_tree,
    compress_phase,
    merge_phase,
    optimize_disconnected,
    optimize_encoding_tree,
    pad_to_height,
)
from .svm import CvReport, SvmModel, cross_validate, predict, smo_train

__all__ = [
    "Dataset",
    "DatasetParseError",
    "DegenerateGraphError",
    "Graph",
    "InitialLabeling",
    "assign_initial_labels",
    "parse_tudataset",
    "write_tudataset",
    "EncodingTree",
    "one_level_tree",
    "structural_entropy",
    "degree_entropy",
    "brute_force_min_entropy",
    "recompute_caches",
    "OptimizerConfig",
    "OptimizerStats",
    "merge_phase",
    "compress_phase",
    "pad_to_height",
    "optimize_encoding_tree",
    "optimize_disconnected",
    "build_tree",
    "LabelDictionary",
    "FeatureVector",
    "KernelMatrix",
    "hierarchical_reporting",
    "kernel_value",
    "gram_matrix",
    "rbf_on_features",
    "SvmModel",
    "smo_train",
    "predict",
    "cross_validate",
    "CvReport",
]

__version__ = "0.1.0"
