"""MGRNet: multi-scale graph-convolution classification of hyperspectral images.

Thin wrapper around the C++ core. The heavy lifting (tensor primitives,
PCA, the training pipeline) lives in the compiled ``mgrnet._core`` module.
"""

from mgrnet._core import (
    MgrnetError,
    PcaModel,
    adaptive_avg_pool,
    apply_pca,
    conv2d,
    evaluate_metrics,
    fit_pca,
    make_synthetic,
    read_dataset,
    relu,
    run_experiment,
    softmax,
    write_dataset,
)

__all__ = [
    "MgrnetError",
    "PcaModel",
    "adaptive_avg_pool",
    "apply_pca",
    "conv2d",
    "evaluate_metrics",
    "fit_pca",
    "make_synthetic",
    "read_dataset",
    "relu",
    "run_experiment",
    "softmax",
    "write_dataset",
]
