"""Deterministic synthetic data for the feature-scaling benchmark.

A master seed spawns named substreams per repetition, so any cell of an
experiment is reproducible in isolation and independent of scheduling:

    design  -> the n x d_max standard-normal design matrix
    noise   -> one label-noise vector per repetition (shared by every d)
    split   -> the 80-20 train/test permutation (shared by every d)
    coeffs  -> random-matrix target coefficients (shared by every d)
    train   -> the train/validation permutation inside train_rfm, per (rep, d)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

_STREAM_IDS = {"design": 0, "noise": 1, "split": 2, "coeffs": 3, "train": 4}

RANDMAT_WIDTH = 10  # the random-matrix target reads this many leading columns
TRAIN_FRACTION = 0.8


def substream(master_seed: int, rep: int, name: str, *extra: int) -> np.random.Generator:
    """Independent generator for one named stream of one repetition."""
    key = (rep, _STREAM_IDS[name], *extra)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def rep_seed(master_seed: int, rep: int) -> int:
    """Stable 64-bit identifier for one repetition, recorded in sweep output."""
    state = np.random.SeedSequence(master_seed, spawn_key=(rep,)).generate_state(2)
    return int(state[0]) | (int(state[1]) << 32)


@dataclass(frozen=True)
class TargetSpec:
    """Which target function labels the data.

    kind "cubic" needs d >= 3; "randmat" needs d >= 10 and a length-10
    coefficient vector.
    """

    kind: str
    randmat_coeffs: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("cubic", "randmat"):
            raise ValueError(f"unknown target kind {self.kind!r}")
        if self.kind == "randmat":
            if self.randmat_coeffs is None or len(self.randmat_coeffs) != RANDMAT_WIDTH:
                raise ValueError(f"randmat target needs {RANDMAT_WIDTH} coefficients")
        elif self.randmat_coeffs is not None:
            raise ValueError("cubic target takes no coefficients")


@dataclass(frozen=True)
class NoiseSpec:
    """Label noise: one vector drawn per repetition, reused at every d."""

    sigma: float
    noise_vector: np.ndarray

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.sigma == 0 and np.any(self.noise_vector != 0.0):
            raise ValueError("sigma=0 requires an all-zero noise vector")


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint train/test row indices covering 0..n-1."""

    train_indices: np.ndarray
    test_indices: np.ndarray


def gen_design(n: int, d_max: int, rng: np.random.Generator) -> np.ndarray:
    """n x d_max matrix of i.i.d. standard normals."""
    if n < 1 or d_max < 1:
        raise ValueError(f"design shape must be positive, got {n} x {d_max}")
    return rng.standard_normal((n, d_max))


def slice_and_scale(X: np.ndarray, d: int) -> np.ndarray:
    """First d columns of X, each entry scaled by 1/sqrt(d).

    The scaling keeps the expected squared row norm at 1 for every d.
    """
    if not 1 <= d <= X.shape[1]:
        raise ValueError(f"d={d} out of range [1, {X.shape[1]}]")
    return X[:, :d] / np.sqrt(d)


def eval_target(X_scaled: np.ndarray, spec: TargetSpec) -> np.ndarray:
    """Label the (scaled) design rows with the chosen target function."""
    d = X_scaled.shape[1]
    if spec.kind == "cubic":
        if d < 3:
            raise DimensionMismatchError(f"cubic target needs d >= 3, got {d}")
        x1, x2, x3 = X_scaled[:, 0], X_scaled[:, 1], X_scaled[:, 2]
        return 5.0 * x1**3 + 2.0 * x2**2 + 10.0 * x3
    if d < RANDMAT_WIDTH:
        raise DimensionMismatchError(f"randmat target needs d >= {RANDMAT_WIDTH}, got {d}")
    K = np.asarray(spec.randmat_coeffs, dtype=np.float64)
    return X_scaled[:, :RANDMAT_WIDTH] @ K


def draw_noise(n: int, sigma: float, rng: np.random.Generator) -> NoiseSpec:
    """One noise vector of length n; exactly zero when sigma is zero."""
    if sigma == 0:
        return NoiseSpec(0.0, np.zeros(n))
    return NoiseSpec(sigma, sigma * rng.standard_normal(n))


def add_noise(y: np.ndarray, spec: NoiseSpec) -> np.ndarray:
    if y.shape[0] != spec.noise_vector.shape[0]:
        raise DimensionMismatchError(
            f"targets length {y.shape[0]} != noise length {spec.noise_vector.shape[0]}"
        )
    return y + spec.noise_vector


def draw_randmat_coeffs(rng: np.random.Generator) -> tuple[float, ...]:
    return tuple(rng.standard_normal(RANDMAT_WIDTH))


def make_split(n: int, fraction: float, rng: np.random.Generator) -> SplitPlan:
    """Seeded permutation split; first round(fraction * n) rows train."""
    if n < 5:
        raise ValueError(f"need at least 5 rows to split, got {n}")
    n_train = round(fraction * n)
    if n_train < 1 or n_train >= n:
        raise ValueError(f"degenerate split: {n_train} train of {n}")
    perm = rng.permutation(n)
    return SplitPlan(perm[:n_train], perm[n_train:])
