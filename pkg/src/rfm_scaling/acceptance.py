"""Machine-checked acceptance suite.

Each criterion returns a CriterionResult; the CLI `verify` subcommand and
the test suite both drive this module.  The shape criteria run reduced-rep
sweeps (reps=10, coarsened grids) and check the decrease-increase-decrease
signature of the test-MSE curves via inflection windows proportional to N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import diagnostics
from .kernels import KernelHyperparams, predict, predictor_gradients
from .presets import DEFAULT_SEED
from .rfm import TrainConfig, TrainedModel, agop, fit_baseline, train_rfm
from .store import records_to_csv
from .sweep import (
    ExperimentSpec,
    build_d_grid,
    detect_inflections,
    moving_average,
    run_experiment,
    run_experiment_with_diagnostics,
    summarize,
)

# Inflection windows as fractions of N (location of min, location of max).
RFM_MIN_WINDOW = (0.05, 0.2)
RFM_MAX_WINDOW = (0.3, 0.7)
BASELINE_MIN_WINDOW = (0.02, 0.12)
BASELINE_MAX_WINDOW = (0.1, 0.4)

SMOOTH_WINDOW = 2
SHAPE_REPS = 10

SUITES = {
    "fast": (4, 5, 8),
    "shape": (1, 2, 3, 6, 7, 9),
    "determinism": (10,),
    "all": tuple(range(1, 11)),
}


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} criterion {self.number} ({self.name}): {self.detail}"


def shape_spec(kind: str, master_seed: int = DEFAULT_SEED) -> ExperimentSpec:
    """Reduced-scale specs used by the shape criteria."""
    config = TrainConfig()
    if kind == "base":
        return ExperimentSpec("base", 1000, build_d_grid(1000, "base", 5, 25),
                              "cubic", 0.0, SHAPE_REPS, master_seed, config)
    if kind == "noise":
        return ExperimentSpec("noise_sigma0.1", 1000, build_d_grid(1000, "base", 5, 25),
                              "cubic", 0.1, SHAPE_REPS, master_seed, config)
    if kind == "size":
        return ExperimentSpec("size_n400", 400, build_d_grid(400, "size_scaled"),
                              "cubic", 0.0, SHAPE_REPS, master_seed, config)
    if kind == "randmat":
        return ExperimentSpec("target_randmat", 1000,
                              build_d_grid(1000, "base", 5, 25, d_min=10),
                              "randmat", 0.0, SHAPE_REPS, master_seed, config)
    raise ValueError(f"unknown shape spec {kind!r}")


def test_curve(records, model: str) -> list[tuple[int, float]]:
    rows = [r for r in summarize(records) if r.model == model and r.split == "test"]
    return [(r.d, r.mean_mse) for r in sorted(rows, key=lambda r: r.d)]


def check_shape(records, model: str, n: int, min_window, max_window,
                require_tail_below_max: bool = False):
    """Look for a local minimum then a local maximum inside the windows.

    Returns (passed, detail).  With require_tail_below_max, additionally
    demands the smoothed curve at the largest d be below the detected
    maximum's value.
    """
    curve = test_curve(records, model)
    inflections = detect_inflections(curve, window=SMOOTH_WINDOW)
    smoothed = dict(zip([d for d, _ in curve],
                        moving_average([v for _, v in curve], SMOOTH_WINDOW)))
    lo_min, hi_min = min_window[0] * n, min_window[1] * n
    lo_max, hi_max = max_window[0] * n, max_window[1] * n
    mins = [d for kind, d in inflections if kind == "min" and lo_min <= d <= hi_min]
    maxs = [d for kind, d in inflections if kind == "max" and lo_max <= d <= hi_max]
    found = [(dmin, dmax) for dmin in mins for dmax in maxs if dmax > dmin]
    detail = (f"inflections={inflections}, min window [{lo_min:g},{hi_min:g}], "
              f"max window [{lo_max:g},{hi_max:g}]")
    if not found:
        return False, f"no min/max pair inside windows; {detail}"
    dmin, dmax = found[0]
    detail = f"min at d={dmin}, max at d={dmax}"
    if require_tail_below_max:
        d_tail = curve[-1][0]
        tail, peak = smoothed[d_tail], smoothed[dmax]
        detail += f", tail MSE {tail:.4g} at d={d_tail} vs peak {peak:.4g}"
        if not tail < peak:
            return False, f"tail not below detected maximum; {detail}"
    return True, detail


class AcceptanceRunner:
    """Runs criteria, sharing the expensive sweeps between them."""

    def __init__(self, workers: int | None = None, log=None,
                 master_seed: int = DEFAULT_SEED):
        self.workers = workers
        self.log = log or (lambda msg: None)
        self.master_seed = master_seed
        self._cache: dict[str, object] = {}

    def _sweep(self, kind: str):
        key = f"run_{kind}"
        if key not in self._cache:
            spec = shape_spec(kind, self.master_seed)
            self.log(f"running {spec.name} sweep: n={spec.n}, reps={spec.reps}, "
                     f"{len(spec.d_grid)} grid points ...")
            if kind == "base":
                self._cache[key] = run_experiment_with_diagnostics(spec, self.workers)
            else:
                self._cache[key] = run_experiment(spec, self.workers)
        return self._cache[key]

    # -- criteria -----------------------------------------------------------

    def criterion_1(self) -> CriterionResult:
        records, _ = self._sweep("base")
        ok, detail = check_shape(records, "rfm", 1000, RFM_MIN_WINDOW,
                                 RFM_MAX_WINDOW, require_tail_below_max=True)
        return CriterionResult(1, "base RFM curve shape", ok, detail)

    def criterion_2(self) -> CriterionResult:
        records, _ = self._sweep("base")
        ok, detail = check_shape(records, "baseline", 1000,
                                 BASELINE_MIN_WINDOW, BASELINE_MAX_WINDOW)
        return CriterionResult(2, "base baseline curve shape", ok, detail)

    def criterion_3(self) -> CriterionResult:
        parts = []
        all_ok = True
        for kind, n in (("noise", 1000), ("size", 400), ("randmat", 1000)):
            records = self._sweep(kind)
            ok, detail = check_shape(records, "rfm", n, RFM_MIN_WINDOW, RFM_MAX_WINDOW)
            all_ok &= ok
            parts.append(f"{kind}: {'ok' if ok else 'FAIL'} ({detail})")
        return CriterionResult(3, "shape robustness", all_ok, "; ".join(parts))

    def criterion_4(self) -> CriterionResult:
        rng = np.random.default_rng(41)
        worst = 0.0
        with diagnostics.capture(check_metrics=False) as diag:
            for _ in range(50):
                n = int(rng.integers(5, 201))
                d = int(rng.integers(1, 51))
                X = rng.standard_normal((n, d))
                y = rng.standard_normal(n)
                X_eval = rng.standard_normal((10, d))
                zero_iter = train_rfm(X, y, TrainConfig(iterations=0),
                                      np.random.default_rng(int(rng.integers(2**32))))
                baseline = fit_baseline(X, y)
                for Xe in (X, X_eval):
                    diff = float(np.max(np.abs(predict(Xe, zero_iter)
                                               - predict(Xe, baseline))))
                    worst = max(worst, diff)
        self._cache["crit4_diag"] = diag
        ok = worst <= 1e-12
        return CriterionResult(4, "baseline == 0-iteration RFM", ok,
                               f"max prediction diff {worst:.3e} over 50 instances")

    def criterion_5(self) -> CriterionResult:
        rng = np.random.default_rng(53)
        worst = 0.0
        step = 1e-5
        for _ in range(100):
            n = int(rng.integers(2, 21))
            d = int(rng.integers(1, 9))
            m = int(rng.integers(1, 6))
            X_train = rng.standard_normal((n, d))
            X_eval = rng.standard_normal((m, d))
            A = rng.standard_normal((d, d))
            M = A.T @ A / d
            M = 0.5 * (M + M.T)
            alpha = rng.standard_normal(n)
            hp = KernelHyperparams(bandwidth=float(rng.uniform(0.5, 5.0)))
            model = TrainedModel(X_train, alpha, M, hp, 0)
            G = predictor_gradients(X_eval, X_train, alpha, M, hp.bandwidth,
                                    hp.dist_floor)
            G_fd = np.empty_like(G)
            for k in range(d):
                e = np.zeros(d)
                e[k] = step
                G_fd[:, k] = (predict(X_eval + e, model)
                              - predict(X_eval - e, model)) / (2 * step)
            rel = float(np.max(np.abs(G - G_fd)) / np.max(np.abs(G_fd)))
            worst = max(worst, rel)
        ok = worst <= 1e-5
        return CriterionResult(5, "gradient finite-difference oracle", ok,
                               f"worst relative error {worst:.3e} over 100 instances")

    def criterion_6(self) -> CriterionResult:
        records, diag = self._sweep("base")
        spec = shape_spec("base", self.master_seed)
        expected = spec.reps * len(spec.d_grid) * spec.train_config.iterations
        ok = (diag.metric_count == expected
              and diag.metric_psd_failures == 0
              and diag.max_metric_asymmetry <= 1e-12)
        return CriterionResult(6, "AGOP metric properties", ok,
                               f"{diag.metric_count}/{expected} metrics checked, "
                               f"{diag.metric_psd_failures} PSD failures, "
                               f"max asymmetry {diag.max_metric_asymmetry:.3e}")

    def criterion_7(self) -> CriterionResult:
        # The solver raises on any residual over the bound, so completed runs
        # are themselves evidence; the base run's capture quantifies it.
        records, diag = self._sweep("base")
        for kind in ("noise", "size", "randmat"):
            self._sweep(kind)
        if "crit4_diag" not in self._cache:
            self.criterion_4()
        extra = self._cache["crit4_diag"]
        total = diag.solve_count + extra.solve_count
        worst = max(diag.max_solve_residual_ratio, extra.max_solve_residual_ratio)
        ok = total > 0 and worst <= 1e-8
        return CriterionResult(7, "ridge solve residual bound", ok,
                               f"{total} solves checked, worst residual ratio "
                               f"{worst:.3e} (bound 1e-8)")

    def criterion_8(self) -> CriterionResult:
        rng = np.random.default_rng(67)
        n, d = 500, 20
        w = rng.standard_normal(d)
        w /= np.linalg.norm(w)
        X = rng.standard_normal((n, d))
        y = X @ w
        # bandwidth on the scale of typical pairwise distances (~sqrt(2d))
        model = fit_baseline(X, y, KernelHyperparams(bandwidth=5.0))
        G = predictor_gradients(X, X, model.alpha, model.metric,
                                model.hyperparams.bandwidth,
                                model.hyperparams.dist_floor)
        M1 = agop(G)
        eigvals, eigvecs = np.linalg.eigh(M1)
        cosine = float(abs(eigvecs[:, -1] @ w))
        ok = cosine >= 0.99
        return CriterionResult(8, "linear-target feature alignment", ok,
                               f"|cos(top eigenvector, w)| = {cosine:.5f}")

    def criterion_9(self) -> CriterionResult:
        records = self._sweep("noise")
        floor = 0.5 * 0.1**2
        offenders = [(r.d, r.mean_mse) for r in summarize(records)
                     if r.split == "test" and r.mean_mse < floor]
        ok = not offenders
        detail = (f"all test-MSE means >= {floor}" if ok
                  else f"below noise floor {floor} at {offenders[:5]}")
        return CriterionResult(9, "irreducible noise floor", ok, detail)

    def criterion_10(self) -> CriterionResult:
        records_a, _ = self._sweep("base")
        spec = shape_spec("base", self.master_seed)
        alt_workers = 2 if (self.workers or 1) == 1 else 1
        self.log(f"re-running {spec.name} with workers={alt_workers} "
                 "for the determinism check ...")
        records_b = run_experiment(spec, workers=alt_workers)
        csv_a, csv_b = records_to_csv(records_a), records_to_csv(records_b)
        ok = csv_a == csv_b
        return CriterionResult(10, "byte-identical reruns", ok,
                               "records CSV identical across worker counts"
                               if ok else "records CSV bytes differ")

    def run(self, suite: str = "all") -> list[CriterionResult]:
        if suite not in SUITES:
            raise ValueError(f"unknown suite {suite!r}; choose from {sorted(SUITES)}")
        results = []
        for number in SUITES[suite]:
            result = getattr(self, f"criterion_{number}")()
            self.log(result.line())
            results.append(result)
        return results


def run_acceptance(suite: str = "all", workers: int | None = None,
                   log=None, master_seed: int = DEFAULT_SEED) -> list[CriterionResult]:
    return AcceptanceRunner(workers=workers, log=log, master_seed=master_seed).run(suite)
