"""Experiment orchestration.

Builds feature-count grids, runs every (repetition, d) cell on a bounded
process pool, and reduces the per-cell MSE records to confidence-interval
summaries and curve-shape (inflection) reports.

Each cell regenerates its inputs from named substreams of the master seed,
so results are identical regardless of scheduling or worker count.  BLAS is
pinned to one thread inside workers for the same reason.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from concurrent.futures import FIRST_EXCEPTION, ProcessPoolExecutor, wait
from dataclasses import dataclass, replace

import numpy as np
from threadpoolctl import threadpool_limits

from . import diagnostics
from .datagen import (
    RANDMAT_WIDTH,
    TRAIN_FRACTION,
    TargetSpec,
    add_noise,
    draw_noise,
    draw_randmat_coeffs,
    eval_target,
    gen_design,
    make_split,
    rep_seed,
    slice_and_scale,
    substream,
)
from .rfm import TrainConfig, fit_baseline, mse, predict_model, train_rfm

WORKERS_ENV = "RFM_SCALING_WORKERS"

# 95% confidence interval under the normal approximation: mean +/- Z95 * sem.
Z95 = 1.96


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to rerun one experiment bit-for-bit."""

    name: str
    n: int
    d_grid: tuple[int, ...]
    target_kind: str
    sigma: float
    reps: int
    master_seed: int
    train_config: TrainConfig = TrainConfig()

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError(f"reps must be >= 1, got {self.reps}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        grid = tuple(self.d_grid)
        if len(grid) < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("d_grid must be non-empty and strictly ascending")
        d_min = RANDMAT_WIDTH if self.target_kind == "randmat" else 5
        if grid[0] < d_min:
            raise ValueError(f"d_grid minimum {grid[0]} < {d_min} for {self.target_kind}")
        if self.target_kind not in ("cubic", "randmat"):
            raise ValueError(f"unknown target kind {self.target_kind!r}")
        object.__setattr__(self, "d_grid", grid)


@dataclass(frozen=True)
class SweepRecord:
    """One MSE measurement: (experiment, rep, d, model, split)."""

    experiment: str
    rep: int
    n: int
    d: int
    sigma: float
    target: str
    model: str
    split: str
    mse: float
    best_iter: int
    seed: int


@dataclass(frozen=True)
class SummaryRow:
    """Cross-repetition mean and 95% CI for one (d, model, split) group."""

    experiment: str
    d: int
    model: str
    split: str
    n_reps: int
    mean_mse: float
    std_mse: float
    sem: float
    ci_lo: float
    ci_hi: float


def build_d_grid(n: int, mode: str, dense_step: int = 1, coarse_step: int = 10,
                 d_min: int = 5) -> tuple[int, ...]:
    """Feature-count grid: a dense low range plus a coarse range.

    base: {d_min..99 step dense_step} | {100..2000 step coarse_step}
    size_scaled: {d_min..n//10 step dense_step} | {n//10..2n step coarse_step}
    """
    if n < 50:
        raise ValueError(f"n must be >= 50, got {n}")
    if mode == "base":
        dense = range(d_min, 100, dense_step)
        coarse = range(100, 2001, coarse_step)
    elif mode == "size_scaled":
        knee = n // 10
        dense = range(d_min, knee + 1, dense_step)
        coarse = range(knee, 2 * n + 1, coarse_step)
    else:
        raise ValueError(f"unknown grid mode {mode!r}")
    grid = sorted(set(dense) | set(coarse))
    if not grid:
        raise ValueError(f"empty d-grid for n={n}, mode={mode}")
    return tuple(grid)


def _run_cell(spec: ExperimentSpec, rep: int, d: int, validate: bool):
    seed = spec.master_seed
    n = spec.n
    design = gen_design(n, spec.d_grid[-1], substream(seed, rep, "design"))
    noise = draw_noise(n, spec.sigma, substream(seed, rep, "noise"))
    split = make_split(n, TRAIN_FRACTION, substream(seed, rep, "split"))
    if spec.target_kind == "randmat":
        target = TargetSpec("randmat", draw_randmat_coeffs(substream(seed, rep, "coeffs")))
    else:
        target = TargetSpec("cubic")

    Xd = slice_and_scale(design, d)
    y = add_noise(eval_target(Xd, target), noise)
    Xtr, ytr = Xd[split.train_indices], y[split.train_indices]
    Xte, yte = Xd[split.test_indices], y[split.test_indices]

    def fit_and_measure():
        rfm_model = train_rfm(Xtr, ytr, spec.train_config,
                              substream(seed, rep, "train", d))
        base_model = fit_baseline(Xtr, ytr, spec.train_config.hyperparams)
        out = []
        for model_name, model in (("baseline", base_model), ("rfm", rfm_model)):
            for split_name, Xe, ye in (("train", Xtr, ytr), ("test", Xte, yte)):
                out.append(SweepRecord(
                    experiment=spec.name, rep=rep, n=n, d=d, sigma=spec.sigma,
                    target=spec.target_kind, model=model_name, split=split_name,
                    mse=mse(predict_model(Xe, model), ye),
                    best_iter=model.best_iter, seed=rep_seed(seed, rep),
                ))
        return out

    if validate:
        with diagnostics.capture(check_metrics=True) as diag:
            records = fit_and_measure()
        return records, diag
    return fit_and_measure(), None


def _cell_worker(args):
    spec, rep, d, validate = args
    with threadpool_limits(limits=1):
        return _run_cell(spec, rep, d, validate)


def resolve_workers(workers: int | None = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV)
        workers = int(env) if env else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def _run(spec: ExperimentSpec, workers: int | None, validate: bool):
    workers = resolve_workers(workers)
    cells = [(rep, d) for rep in range(spec.reps) for d in spec.d_grid]
    records: list[SweepRecord] = []
    diag = diagnostics.RunDiagnostics(check_metrics=validate)
    ctx = multiprocessing.get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        futures = {pool.submit(_cell_worker, (spec, rep, d, validate)): (rep, d)
                   for rep, d in cells}
        done, not_done = wait(futures, return_when=FIRST_EXCEPTION)
        for fut in done:
            exc = fut.exception()
            if exc is not None:
                rep, d = futures[fut]
                for other in not_done:
                    other.cancel()
                raise RuntimeError(
                    f"experiment {spec.name!r} aborted at cell rep={rep}, d={d}: {exc}"
                ) from exc
        for fut in futures:
            cell_records, cell_diag = fut.result()
            records.extend(cell_records)
            if cell_diag is not None:
                diag.merge(cell_diag)
    records.sort(key=lambda r: (r.rep, r.d, r.model, r.split))
    return records, diag


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> list[SweepRecord]:
    """All records of one experiment: reps x |d_grid| x 2 models x 2 splits."""
    return _run(spec, workers, validate=False)[0]


def run_experiment_with_diagnostics(spec: ExperimentSpec, workers: int | None = None):
    """As run_experiment, plus solver-residual and metric-property evidence."""
    return _run(spec, workers, validate=True)


def summarize(records: list[SweepRecord]) -> list[SummaryRow]:
    """Per-(d, model, split) mean, sample std, and normal-approximation 95% CI."""
    if not records:
        raise ValueError("no records to summarize")
    names = {r.experiment for r in records}
    if len(names) > 1:
        raise ValueError(f"records mix experiments: {sorted(names)}")
    groups: dict[tuple[int, str, str], list[float]] = {}
    for r in records:
        groups.setdefault((r.d, r.model, r.split), []).append(r.mse)
    rows = []
    for (d, model, split), values in sorted(groups.items()):
        k = len(values)
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if k > 1 else 0.0
        sem = std / math.sqrt(k)
        rows.append(SummaryRow(
            experiment=next(iter(names)), d=d, model=model, split=split,
            n_reps=k, mean_mse=mean, std_mse=std, sem=sem,
            ci_lo=mean - Z95 * sem, ci_hi=mean + Z95 * sem,
        ))
    return rows


def moving_average(values, window: int) -> np.ndarray:
    """Centered moving average of width 2*window+1, truncated at the edges."""
    y = np.asarray(values, dtype=np.float64)
    return np.array([
        y[max(0, i - window): i + window + 1].mean() for i in range(len(y))
    ])


def detect_inflections(curve, window: int = 2) -> list[tuple[str, int]]:
    """Local extrema of the smoothed (d, value) curve, ordered by d.

    Plateaus report their leftmost point; endpoints are never extrema.
    """
    curve = list(curve)
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if len(curve) < 2 * window + 1:
        raise ValueError(f"need at least {2 * window + 1} points, got {len(curve)}")
    ds = [int(d) for d, _ in curve]
    smoothed = moving_average([v for _, v in curve], window)

    # Collapse equal-value runs so plateaus compare against their neighbors.
    runs: list[tuple[int, float]] = []  # (start index, value)
    for i, v in enumerate(smoothed):
        if not runs or v != runs[-1][1]:
            runs.append((i, v))
    out = []
    for j in range(1, len(runs) - 1):
        start, v = runs[j]
        prev_v, next_v = runs[j - 1][1], runs[j + 1][1]
        if prev_v > v < next_v:
            out.append(("min", ds[start]))
        elif prev_v < v > next_v:
            out.append(("max", ds[start]))
    return out


def rescaled_spec(spec: ExperimentSpec, **overrides) -> ExperimentSpec:
    """Convenience for preset variations."""
    return replace(spec, **overrides)
