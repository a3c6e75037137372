"""Recursive feature machine training.

Alternates kernel ridge fits with metric updates from the average outer
product of predictor gradients, selects the best metric by validation MSE,
and refits on the full training split.

Internally the learned metric M = G^T G / m is carried as its factor
G / sqrt(m) (m x d), which keeps per-iteration cost linear in d; the
materialized d x d matrix is only formed for the returned model and for
diagnostic checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .errors import DimensionMismatchError, NonFiniteError, RfmError
from .kernels import (
    KernelHyperparams,
    gradients_from_parts,
    kernel_from_distances,
    solve_kernel_ridge,
    sqdists_from_projection,
)


@dataclass(frozen=True)
class TrainConfig:
    """Iteration budget, validation fraction, and kernel hyperparameters."""

    iterations: int = 10
    val_fraction: float = 0.2
    hyperparams: KernelHyperparams = KernelHyperparams()
    include_iteration_zero: bool = True

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if not 0 < self.val_fraction < 1:
            raise ValueError(f"val_fraction must be in (0,1), got {self.val_fraction}")
        if self.iterations == 0 and not self.include_iteration_zero:
            raise ValueError("iterations=0 requires include_iteration_zero=True")


@dataclass
class TrainedModel:
    """Frozen kernel predictor: training rows, dual weights, learned metric."""

    X_train: np.ndarray
    alpha: np.ndarray
    metric: np.ndarray
    hyperparams: KernelHyperparams
    best_iter: int
    val_mse_history: list[float] = field(default_factory=list)
    # Low-rank factor F with metric == F^T F; None means the identity metric.
    # Set by train_rfm/fit_baseline; lets predict_model avoid the d x d
    # metric product when d is large.
    metric_factor: np.ndarray | None = None


def mse(predictions, targets) -> float:
    """Mean squared difference of two equal-length vectors."""
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    t = np.asarray(targets, dtype=np.float64).reshape(-1)
    if p.shape != t.shape or p.shape[0] < 1:
        raise DimensionMismatchError(
            f"length mismatch: predictions {p.shape[0]}, targets {t.shape[0]}"
        )
    return float(np.mean((p - t) ** 2))


def agop(G) -> np.ndarray:
    """Average gradient outer product (1/m) sum_i g_i g_i^T, symmetrized."""
    G = np.asarray(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] < 1:
        raise DimensionMismatchError(f"gradient matrix must be non-empty 2-D, got {G.shape}")
    if not np.all(np.isfinite(G)):
        raise NonFiniteError("gradient matrix contains non-finite values")
    M = G.T @ G / G.shape[0]
    M = 0.5 * (M + M.T)
    diagnostics.record_metric(M)
    return M


def _materialize(factor: np.ndarray | None, d: int) -> np.ndarray:
    if factor is None:
        return np.eye(d)
    M = factor.T @ factor
    return 0.5 * (M + M.T)


def _distances(A: np.ndarray, B: np.ndarray, factor: np.ndarray | None,
               same: bool) -> np.ndarray:
    """Mahalanobis distances under M = factor^T factor (identity if None)."""
    if factor is not None:
        A = A @ factor.T
        B = A if same else B @ factor.T
    return np.sqrt(sqdists_from_projection(A, B, same=same))


def _fit(X: np.ndarray, y: np.ndarray, factor: np.ndarray | None,
         hp: KernelHyperparams) -> np.ndarray:
    D = _distances(X, X, factor, same=True)
    K = kernel_from_distances(D, hp.bandwidth)
    return solve_kernel_ridge(K, y, hp.ridge)


def fit_baseline(X, y, hyperparams: KernelHyperparams = KernelHyperparams()) -> TrainedModel:
    """Laplace kernel ridge with the Euclidean metric (M = I).

    Equivalent to an RFM trained for 0 iterations.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    alpha = _fit(X, y, None, hyperparams)
    return TrainedModel(X, alpha, np.eye(X.shape[1]), hyperparams,
                        best_iter=0, val_mse_history=[])


def train_rfm(X, y, config: TrainConfig, rng: np.random.Generator) -> TrainedModel:
    """Train an RFM and return the model refit on the full split.

    The rows are permuted with rng; the last ceil(val_fraction * n) rows of
    the permutation form the validation split.  Candidate metrics are the
    identity (iteration 0, when include_iteration_zero) and each metric
    update; the candidate with the lowest validation MSE wins, earliest
    index on ties.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, d = X.shape
    if y.shape[0] != n:
        raise DimensionMismatchError(f"X rows {n} != targets {y.shape[0]}")
    if n < 5:
        raise ValueError(f"need at least 5 rows to split, got {n}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise NonFiniteError("training data contains non-finite values")

    n_val = math.ceil(config.val_fraction * n)
    if n_val >= n or n_val < 1:
        raise ValueError(f"degenerate split: {n - n_val} subtrain, {n_val} validation")
    perm = rng.permutation(n)
    sub_idx, val_idx = perm[: n - n_val], perm[n - n_val:]
    Xs, ys = X[sub_idx], y[sub_idx]
    Xv, yv = X[val_idx], y[val_idx]
    hp = config.hyperparams
    m = Xs.shape[0]

    factor: np.ndarray | None = None
    best_mse = math.inf
    best_iter = -1
    best_factor: np.ndarray | None = None
    history: list[float] = []

    for t in range(config.iterations + 1):
        D_ss = _distances(Xs, Xs, factor, same=True)
        K_ss = kernel_from_distances(D_ss, hp.bandwidth)
        try:
            alpha_s = solve_kernel_ridge(K_ss, ys, hp.ridge)
        except RfmError as exc:
            raise type(exc)(f"at RFM iteration {t}: {exc}") from exc
        if t > 0 or config.include_iteration_zero:
            D_vs = _distances(Xv, Xs, factor, same=False)
            K_vs = kernel_from_distances(D_vs, hp.bandwidth)
            val = mse(K_vs @ alpha_s, yv)
            history.append(val)
            if val < best_mse:
                best_mse, best_iter, best_factor = val, t, factor
        if t < config.iterations:
            G = gradients_from_parts(Xs, Xs, K_ss, D_ss, alpha_s, factor,
                                     hp.bandwidth, hp.dist_floor)
            factor = G / math.sqrt(m)
            if diagnostics.metrics_checked():
                diagnostics.record_metric(_materialize(factor, d))

    alpha = _fit(X, y, best_factor, hp)
    return TrainedModel(X, alpha, _materialize(best_factor, d), hp,
                        best_iter=best_iter, val_mse_history=history,
                        metric_factor=best_factor)


def predict_model(X_eval, model: TrainedModel) -> np.ndarray:
    """Factor-aware predictor evaluation.

    Same value as kernels.predict up to round-off, but O(n m d) instead of
    O(n d^2) when the model carries a metric factor.
    """
    X_eval = np.asarray(X_eval, dtype=np.float64)
    D = _distances(X_eval, model.X_train, model.metric_factor, same=False)
    K = kernel_from_distances(D, model.hyperparams.bandwidth)
    return K @ model.alpha
