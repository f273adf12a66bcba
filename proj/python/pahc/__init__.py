"""Proximity-Aware Hierarchical Clustering over unit-norm embeddings."""

from pahc._core import (
    ClusterReport,
    ConfigError,
    CurationResult,
    Dendrogram,
    DistanceMatrix,
    EmbeddingSet,
    IoError,
    NumericError,
    __version__,
    class_weights,
    cli_run,
    cosine_matrix,
    curate,
    cut,
    hierarchical,
    kmeans,
    linkage,
    load_embeddings,
    media_pool,
    nn_lists,
    normalize,
    pa_distance,
    pa_matrix,
    pairwise_precision_recall,
    pr_sweep,
    rank_order,
    save_embeddings,
    synth,
    train_hyperplane,
)

__all__ = [
    "ClusterReport",
    "ConfigError",
    "CurationResult",
    "Dendrogram",
    "DistanceMatrix",
    "EmbeddingSet",
    "IoError",
    "NumericError",
    "__version__",
    "class_weights",
    "cli_run",
    "cosine_matrix",
    "curate",
    "cut",
    "hierarchical",
    "kmeans",
    "linkage",
    "load_embeddings",
    "media_pool",
    "nn_lists",
    "normalize",
    "pa_distance",
    "pa_matrix",
    "pairwise_precision_recall",
    "pr_sweep",
    "rank_order",
    "save_embeddings",
    "synth",
    "train_hyperplane",
]
