"""Recursive feature machines and the feature-scaling sweep harness."""

__version__ = "0.1.0"

from .kernels import (
    KernelHyperparams,
    laplace_kernel,
    mahalanobis_distances,
    predict,
    predictor_gradients,
    solve_kernel_ridge,
)
from .rfm import TrainConfig, TrainedModel, agop, fit_baseline, mse, train_rfm
from .sweep import (
    ExperimentSpec,
    SummaryRow,
    SweepRecord,
    build_d_grid,
    detect_inflections,
    run_experiment,
    summarize,
)

__all__ = [
    "KernelHyperparams",
    "laplace_kernel",
    "mahalanobis_distances",
    "predict",
    "predictor_gradients",
    "solve_kernel_ridge",
    "TrainConfig",
    "TrainedModel",
    "agop",
    "fit_baseline",
    "mse",
    "train_rfm",
    "ExperimentSpec",
    "SummaryRow",
    "SweepRecord",
    "build_d_grid",
    "detect_inflections",
    "run_experiment",
    "summarize",
    "__version__",
]
