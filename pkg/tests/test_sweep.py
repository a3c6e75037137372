import numpy as np
import pytest

from rfm_scaling.kernels import KernelHyperparams
from rfm_scaling.rfm import TrainConfig
from rfm_scaling.store import records_to_csv
from rfm_scaling.sweep import (
    ExperimentSpec,
    build_d_grid,
    detect_inflections,
    run_experiment,
    run_experiment_with_diagnostics,
    summarize,
)


def tiny_spec(name="tiny", reps=2, sigma=0.0, seed=99):
    return ExperimentSpec(
        name=name, n=60, d_grid=(5, 8, 12), target_kind="cubic", sigma=sigma,
        reps=reps, master_seed=seed,
        train_config=TrainConfig(iterations=2, hyperparams=KernelHyperparams()),
    )


class TestBuildDGrid:
    def test_base_grid_structure(self):
        grid = build_d_grid(1000, "base")
        assert grid[0] == 5 and grid[-1] == 2000
        assert 99 in grid and 100 in grid
        coarse = [d for d in grid if d >= 100]
        assert all(b - a == 10 for a, b in zip(coarse, coarse[1:]))

    def test_base_grid_point_count(self):
        assert len(build_d_grid(1000, "base")) == 286

    def test_size_scaled_n200(self):
        grid = build_d_grid(200, "size_scaled")
        assert grid[-1] == 400
        dense = [d for d in grid if d <= 20]
        assert dense == list(range(5, 21))

    def test_size_scaled_deduplicates_knee(self):
        grid = build_d_grid(200, "size_scaled")
        assert len(grid) == len(set(grid))

    def test_coarse_steps(self):
        grid = build_d_grid(1000, "base", dense_step=5, coarse_step=25)
        assert grid[0] == 5 and 95 in grid and 100 in grid and grid[-1] == 2000

    def test_small_n_rejected(self):
        with pytest.raises(ValueError):
            build_d_grid(40, "base")


class TestExperimentSpec:
    def test_grid_must_ascend(self):
        with pytest.raises(ValueError):
            ExperimentSpec("x", 60, (8, 5), "cubic", 0.0, 1, 0)

    def test_randmat_needs_d10(self):
        with pytest.raises(ValueError):
            ExperimentSpec("x", 60, (5, 12), "randmat", 0.0, 1, 0)


class TestRunExperiment:
    def test_record_count_and_completeness(self):
        records = run_experiment(tiny_spec(), workers=1)
        assert len(records) == 2 * 3 * 4
        keys = {(r.rep, r.d, r.model, r.split) for r in records}
        assert len(keys) == len(records)
        assert all(r.mse >= 0 and np.isfinite(r.mse) for r in records)
        assert all(r.best_iter == 0 for r in records if r.model == "baseline")

    def test_deterministic_across_runs_and_workers(self):
        a = run_experiment(tiny_spec(), workers=1)
        b = run_experiment(tiny_spec(), workers=2)
        assert records_to_csv(a) == records_to_csv(b)

    def test_diagnostics_counts(self):
        spec = tiny_spec(reps=1)
        records, diag = run_experiment_with_diagnostics(spec, workers=1)
        assert len(records) == 12
        # one metric per update iteration per cell
        assert diag.metric_count == len(spec.d_grid) * spec.train_config.iterations
        assert diag.metric_psd_failures == 0
        assert diag.max_metric_asymmetry <= 1e-12
        # per cell: (iterations+1) subtrain solves + full refit + baseline
        assert diag.solve_count == len(spec.d_grid) * (spec.train_config.iterations + 3)
        assert diag.max_solve_residual_ratio <= 1e-8


class TestSummarize:
    def test_single_rep_collapsed_ci(self):
        rows = summarize(run_experiment(tiny_spec(reps=1), workers=1))
        for row in rows:
            assert row.n_reps == 1
            assert row.ci_lo == row.mean_mse == row.ci_hi
            assert row.std_mse == 0.0

    def test_matches_scalar_loop(self):
        records = run_experiment(tiny_spec(reps=3), workers=1)
        rows = summarize(records)
        for row in rows:
            values = [r.mse for r in records
                      if (r.d, r.model, r.split) == (row.d, row.model, row.split)]
            mean = sum(values) / len(values)
            var = sum((v - mean) ** 2 for v in values) / (len(values) - 1)
            assert row.mean_mse == pytest.approx(mean, abs=1e-12)
            assert row.std_mse == pytest.approx(np.sqrt(var), rel=1e-12)
            assert row.ci_lo == pytest.approx(mean - 1.96 * row.sem, rel=1e-12)
            assert row.ci_hi == pytest.approx(mean + 1.96 * row.sem, rel=1e-12)

    def test_mixed_experiments_rejected(self):
        records = run_experiment(tiny_spec(), workers=1)
        other = run_experiment(tiny_spec(name="other"), workers=1)
        with pytest.raises(ValueError):
            summarize(records + other)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            summarize([])


class TestDetectInflections:
    def test_monotone_decreasing_empty(self):
        curve = [(d, 10.0 - d) for d in range(10)]
        assert detect_inflections(curve, window=1) == []

    def test_v_shape_single_min(self):
        curve = [(d, abs(d - 10)) for d in range(21)]
        assert detect_inflections(curve, window=1) == [("min", 10)]

    def test_down_up_down_template_knots(self):
        # piecewise-linear: falls to d=30, rises to d=60, falls again
        def template(d):
            if d <= 30:
                return 100.0 - 2.0 * d
            if d <= 60:
                return 40.0 + 3.0 * (d - 30)
            return 130.0 - 1.0 * (d - 60)

        ds = list(range(0, 101, 2))
        curve = [(d, template(d)) for d in ds]
        found = dict()
        for kind, d in detect_inflections(curve, window=2):
            found.setdefault(kind, d)
        assert abs(found["min"] - 30) <= 2
        assert abs(found["max"] - 60) <= 2

    def test_plateau_reports_leftmost(self):
        values = [5.0, 3.0, 1.0, 1.0, 1.0, 3.0, 5.0]
        curve = list(enumerate(values))
        result = detect_inflections(curve, window=1)
        assert len(result) == 1 and result[0][0] == "min"

    def test_too_short_rejected(self):
        with pytest.raises(ValueError):
            detect_inflections([(0, 1.0), (1, 2.0)], window=1)
