"""Dense kernel primitives.

Mahalanobis pairwise distances, the Laplace kernel, the kernel ridge solve,
prediction, and analytic predictor gradients.  Everything is a pure function
over float64 numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import diagnostics
from .errors import (
    DimensionMismatchError,
    NonFiniteError,
    SingularSystemError,
    SolverResidualError,
)

# Residual bound enforced on every ridge solve: ||(K+lam*I)a - y||_inf
# <= SOLVE_RTOL * (1 + ||y||_inf).
SOLVE_RTOL = 1e-8
_MAX_REFINE = 3


@dataclass(frozen=True)
class KernelHyperparams:
    """Laplace kernel length scale, ridge strength, and a distance floor
    guarding the gradient singularity at near-coincident points.

    Bandwidth and ridge defaults are declared package choices, not values
    taken from any benchmark; override them via TrainConfig or the CLI.
    """

    bandwidth: float = 1.0
    ridge: float = 1e-3
    dist_floor: float = 1e-10

    def __post_init__(self):
        if not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if self.ridge < 0:
            raise ValueError(f"ridge must be non-negative, got {self.ridge}")
        if not 0 < self.dist_floor <= 1e-6:
            raise ValueError(f"dist_floor must be in (0, 1e-6], got {self.dist_floor}")


def _as_matrix(name: str, a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatchError(f"{name} must be non-empty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFiniteError(f"{name} contains non-finite values")
    return a


def sqdists_from_projection(P: np.ndarray, Q: np.ndarray, same: bool = False) -> np.ndarray:
    """Squared Euclidean distances between rows of P and rows of Q.

    Round-off can make the dot-product formula slightly negative; those
    entries are clamped to zero.  With same=True the result is symmetrized
    and the diagonal forced to exact zero.
    """
    rp = np.einsum("ij,ij->i", P, P)
    rq = rp if same else np.einsum("ij,ij->i", Q, Q)
    sq = rp[:, None] + rq[None, :] - 2.0 * (P @ Q.T)
    if same:
        sq = 0.5 * (sq + sq.T)
        np.fill_diagonal(sq, 0.0)
    np.maximum(sq, 0.0, out=sq)
    return sq


def mahalanobis_distances(X, Z, M) -> np.ndarray:
    """Pairwise distances sqrt((x-z)^T M (x-z)) for rows of X against rows of Z."""
    X = _as_matrix("X", X)
    Z = _as_matrix("Z", Z)
    M = _as_matrix("M", M)
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"metric must be square, got {M.shape}")
    if X.shape[1] != M.shape[0] or Z.shape[1] != M.shape[0]:
        raise DimensionMismatchError(
            f"feature dims disagree: X {X.shape}, Z {Z.shape}, M {M.shape}"
        )
    same = X is Z or (X.shape == Z.shape and np.array_equal(X, Z))
    XM = X @ M
    rx = np.einsum("ij,ij->i", XM, X)
    if same:
        sq = rx[:, None] + rx[None, :] - 2.0 * (XM @ X.T)
        sq = 0.5 * (sq + sq.T)
        np.fill_diagonal(sq, 0.0)
    else:
        rz = np.einsum("ij,ij->i", Z @ M, Z)
        sq = rx[:, None] + rz[None, :] - 2.0 * (XM @ Z.T)
    np.maximum(sq, 0.0, out=sq)
    return np.sqrt(sq)


def laplace_kernel(X, Z, M, bandwidth: float) -> np.ndarray:
    """Laplace kernel exp(-dist_M(x, z) / bandwidth)."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    D = mahalanobis_distances(X, Z, M)
    np.divide(D, -bandwidth, out=D)
    return np.exp(D, out=D)


def kernel_from_distances(D: np.ndarray, bandwidth: float) -> np.ndarray:
    """exp(-D / bandwidth) without mutating D."""
    return np.exp(D / -bandwidth)


def solve_kernel_ridge(K, y, ridge: float) -> np.ndarray:
    """Solve (K + ridge*I) alpha = y by Cholesky, with iterative refinement.

    Guarantees ||(K+ridge*I) alpha - y||_inf <= 1e-8 * (1 + ||y||_inf) or
    raises SolverResidualError.
    """
    K = _as_matrix("K", K)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n = K.shape[0]
    if K.shape[1] != n:
        raise DimensionMismatchError(f"kernel matrix must be square, got {K.shape}")
    if y.shape[0] != n:
        raise DimensionMismatchError(f"targets length {y.shape[0]} != system size {n}")
    if not np.all(np.isfinite(y)):
        raise NonFiniteError("targets contain non-finite values")
    if ridge < 0:
        raise ValueError(f"ridge must be non-negative, got {ridge}")

    A = K + ridge * np.eye(n)
    try:
        cf = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        # Report the smallest pivot from an LDL^T factorization for context.
        _, dmat, _ = scipy.linalg.ldl(A, lower=True)
        smallest = float(np.min(dmat.diagonal()))
        raise SingularSystemError(
            f"K + {ridge}*I is not numerically positive definite "
            f"(smallest pivot {smallest:.6e}): {exc}"
        ) from exc

    alpha = scipy.linalg.cho_solve(cf, y, check_finite=False)
    tol = SOLVE_RTOL * (1.0 + float(np.max(np.abs(y))))
    resid = np.inf
    for _ in range(_MAX_REFINE):
        r = y - A @ alpha
        resid = float(np.max(np.abs(r)))
        if resid <= tol:
            break
        alpha = alpha + scipy.linalg.cho_solve(cf, r, check_finite=False)
    if resid > tol:
        raise SolverResidualError(
            f"ridge solve residual {resid:.3e} exceeds bound {tol:.3e} (n={n})"
        )
    diagnostics.record_solve(resid / (1.0 + float(np.max(np.abs(y)))))
    return alpha


def predict(X_eval, model) -> np.ndarray:
    """Evaluate the kernel predictor f(x) = sum_j alpha_j K_M(x, x_j)."""
    K = laplace_kernel(X_eval, model.X_train, model.metric, model.hyperparams.bandwidth)
    return K @ model.alpha


def predictor_gradients(X_eval, X_train, alpha, M, bandwidth: float,
                        dist_floor: float) -> np.ndarray:
    """Analytic gradients of the Laplace kernel predictor at each eval row.

    Row i is -(1/L) sum_j alpha_j K(x_i, x_j) M (x_i - x_j) / dist, with the
    distance floored at dist_floor and exactly-coincident pairs contributing
    zero (the symmetric subgradient convention at the kernel's kink).
    """
    X_eval = _as_matrix("X_eval", X_eval)
    X_train = _as_matrix("X_train", X_train)
    M = _as_matrix("M", M)
    alpha = np.asarray(alpha, dtype=np.float64).reshape(-1)
    if alpha.shape[0] != X_train.shape[0]:
        raise DimensionMismatchError(
            f"alpha length {alpha.shape[0]} != training rows {X_train.shape[0]}"
        )
    D = mahalanobis_distances(X_eval, X_train, M)
    K = kernel_from_distances(D, bandwidth)
    W = np.where(D == 0.0, 0.0, alpha[None, :] * K / np.maximum(D, dist_floor))
    G = -(1.0 / bandwidth) * ((W.sum(axis=1)[:, None] * X_eval - W @ X_train) @ M)
    if not np.all(np.isfinite(G)):
        bad = int(np.argwhere(~np.isfinite(G))[0, 0])
        raise NonFiniteError(f"non-finite predictor gradient at eval row {bad}")
    return G


def gradients_from_parts(X_eval_proj_src: np.ndarray, X_train_src: np.ndarray,
                         K: np.ndarray, D: np.ndarray, alpha: np.ndarray,
                         factor: np.ndarray | None, bandwidth: float,
                         dist_floor: float) -> np.ndarray:
    """Gradient computation reusing precomputed K and D.

    With factor B (metric M = B^T B) the trailing product uses the factor,
    costing O(m^2 d) instead of O(m d^2); factor=None means M = I.
    """
    W = np.where(D == 0.0, 0.0, alpha[None, :] * K / np.maximum(D, dist_floor))
    U = W.sum(axis=1)[:, None] * X_eval_proj_src - W @ X_train_src
    if factor is not None:
        U = (U @ factor.T) @ factor
    return -(1.0 / bandwidth) * U
