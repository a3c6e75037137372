import numpy as np
import pytest

from rfm_scaling.datagen import (
    NoiseSpec,
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
from rfm_scaling.errors import DimensionMismatchError


class TestSubstreams:
    def test_deterministic(self):
        a = substream(7, 0, "design").standard_normal(5)
        b = substream(7, 0, "design").standard_normal(5)
        assert np.array_equal(a, b)

    def test_streams_distinct(self):
        draws = {
            name: tuple(substream(7, 0, name).standard_normal(3))
            for name in ("design", "noise", "split", "coeffs", "train")
        }
        assert len(set(draws.values())) == len(draws)

    def test_reps_distinct(self):
        a = substream(7, 0, "design").standard_normal(3)
        b = substream(7, 1, "design").standard_normal(3)
        assert not np.array_equal(a, b)

    def test_rep_seed_stable_64bit(self):
        s = rep_seed(7, 3)
        assert s == rep_seed(7, 3)
        assert 0 <= s < 2**64
        assert s != rep_seed(7, 4)


class TestGenDesign:
    def test_deterministic(self):
        assert np.array_equal(gen_design(10, 4, substream(1, 0, "design")),
                              gen_design(10, 4, substream(1, 0, "design")))

    def test_standard_normal_moments(self):
        X = gen_design(1000, 2000, substream(2, 0, "design"))
        assert abs(X.mean()) <= 0.005
        assert 0.99 <= X.var() <= 1.01

    def test_minimal_shape(self):
        X = gen_design(1, 1, substream(3, 0, "design"))
        assert X.shape == (1, 1) and np.isfinite(X[0, 0])


class TestSliceAndScale:
    def test_entry_scaling(self):
        X = np.full((2, 6), 2.0)
        assert slice_and_scale(X, 4)[0, 0] == 1.0

    def test_d_one_unchanged(self):
        X = np.arange(12.0).reshape(3, 4)
        assert np.array_equal(slice_and_scale(X, 1), X[:, :1])

    def test_unit_expected_row_norm(self):
        X = gen_design(500, 200, substream(4, 0, "design"))
        Xs = slice_and_scale(X, 100)
        mean_sq_norm = np.mean((Xs**2).sum(axis=1))
        assert 0.8 <= mean_sq_norm <= 1.2

    def test_out_of_range(self):
        X = np.ones((2, 3))
        for d in (0, 4):
            with pytest.raises(ValueError):
                slice_and_scale(X, d)


class TestEvalTarget:
    def test_cubic_at_ones(self):
        X = np.ones((1, 5))
        assert eval_target(X, TargetSpec("cubic"))[0] == 17.0

    def test_cubic_forced_arithmetic(self):
        X = np.array([[-1.0, 2.0, 0.5, 9.0]])
        assert eval_target(X, TargetSpec("cubic"))[0] == pytest.approx(8.0, rel=1e-14)

    def test_cubic_ignores_trailing_columns(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((20, 15))
        X_zeroed = X.copy()
        X_zeroed[:, 3:] = 0.0
        spec = TargetSpec("cubic")
        assert np.array_equal(eval_target(X, spec), eval_target(X_zeroed, spec))

    def test_randmat_basis_coefficients(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((8, 12))
        e1 = (1.0,) + (0.0,) * 9
        assert np.array_equal(eval_target(X, TargetSpec("randmat", e1)), X[:, 0])

    def test_dimension_shortfall(self):
        with pytest.raises(DimensionMismatchError):
            eval_target(np.ones((2, 2)), TargetSpec("cubic"))
        with pytest.raises(DimensionMismatchError):
            eval_target(np.ones((2, 9)), TargetSpec("randmat", (1.0,) * 10))

    def test_randmat_needs_coeffs(self):
        with pytest.raises(ValueError):
            TargetSpec("randmat")


class TestNoise:
    def test_sigma_zero_is_exact_zero(self):
        spec = draw_noise(50, 0.0, substream(7, 0, "noise"))
        y = np.arange(50.0)
        assert np.array_equal(add_noise(y, spec), y)

    def test_same_noise_across_d_values(self):
        # one NoiseSpec per repetition: both d's see identical noise
        spec = draw_noise(30, 0.01, substream(8, 0, "noise"))
        y_d5 = np.arange(30.0)
        y_d90 = np.arange(30.0) * 2
        assert np.allclose(add_noise(y_d5, spec) - y_d5,
                           add_noise(y_d90, spec) - y_d90, atol=1e-12)

    def test_empirical_std(self):
        spec = draw_noise(10**5, 0.1, substream(9, 0, "noise"))
        y = np.zeros(10**5)
        delta = add_noise(y, spec) - y
        assert 0.098 <= delta.std() <= 0.102

    def test_length_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            add_noise(np.zeros(3), draw_noise(4, 0.1, substream(10, 0, "noise")))

    def test_sigma_zero_requires_zero_vector(self):
        with pytest.raises(ValueError):
            NoiseSpec(0.0, np.ones(3))


class TestMakeSplit:
    def test_ten_rows(self):
        plan = make_split(10, 0.8, substream(11, 0, "split"))
        assert len(plan.train_indices) == 8 and len(plan.test_indices) == 2

    def test_deterministic(self):
        a = make_split(100, 0.8, substream(12, 0, "split"))
        b = make_split(100, 0.8, substream(12, 0, "split"))
        assert np.array_equal(a.train_indices, b.train_indices)
        assert np.array_equal(a.test_indices, b.test_indices)

    def test_thousand_rows_80_20(self):
        plan = make_split(1000, 0.8, substream(13, 0, "split"))
        assert len(plan.train_indices) == 800

    def test_disjoint_and_complete(self):
        plan = make_split(57, 0.8, substream(14, 0, "split"))
        merged = np.sort(np.concatenate([plan.train_indices, plan.test_indices]))
        assert np.array_equal(merged, np.arange(57))


class TestDrawRandmatCoeffs:
    def test_length_and_determinism(self):
        a = draw_randmat_coeffs(substream(15, 0, "coeffs"))
        b = draw_randmat_coeffs(substream(15, 0, "coeffs"))
        assert len(a) == 10 and a == b
