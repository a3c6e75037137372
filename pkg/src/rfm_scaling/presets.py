"""Named experiment presets.

base    one run at N=1000, cubic target, no noise
noise   sigma sweep {0, 0.001, 0.01, 0.1}
size    dataset-size sweep N in {200, 400, 600, 800, 1000}, d scaled to 2N
target  cubic vs. random-matrix target at N=1000

Every parameter is overridable; reps defaults to 10 for tractable runs and
can be raised to 100 for full-scale reproduction.
"""

from __future__ import annotations

from .datagen import RANDMAT_WIDTH
from .kernels import KernelHyperparams
from .rfm import TrainConfig
from .sweep import ExperimentSpec, build_d_grid

PRESETS = ("base", "noise", "size", "target")

DEFAULT_SEED = 2023
DEFAULT_REPS = 10
NOISE_SIGMAS = (0.0, 0.001, 0.01, 0.1)
SIZE_NS = (200, 400, 600, 800, 1000)


def preset_specs(preset: str, *, n: int | None = None, reps: int | None = None,
                 master_seed: int | None = None, sigma: float | None = None,
                 bandwidth: float | None = None, ridge: float | None = None,
                 iterations: int | None = None, dense_step: int = 1,
                 coarse_step: int = 10) -> list[ExperimentSpec]:
    """Resolve a preset name plus overrides into concrete experiment specs."""
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {PRESETS}")
    defaults = KernelHyperparams()
    hp = KernelHyperparams(
        bandwidth=bandwidth if bandwidth is not None else defaults.bandwidth,
        ridge=ridge if ridge is not None else defaults.ridge,
    )
    config = TrainConfig(
        iterations=iterations if iterations is not None else 10,
        hyperparams=hp,
    )
    reps = reps if reps is not None else DEFAULT_REPS
    seed = master_seed if master_seed is not None else DEFAULT_SEED

    def spec(name, n_, target, sig, mode, d_min=5):
        return ExperimentSpec(
            name=name, n=n_,
            d_grid=build_d_grid(n_, mode, dense_step, coarse_step, d_min=d_min),
            target_kind=target, sigma=sig, reps=reps, master_seed=seed,
            train_config=config,
        )

    if preset == "base":
        return [spec("base", n or 1000, "cubic", sigma or 0.0, "base")]
    if preset == "noise":
        sigmas = (sigma,) if sigma is not None else NOISE_SIGMAS
        return [spec(f"noise_sigma{s:g}", n or 1000, "cubic", s, "base")
                for s in sigmas]
    if preset == "size":
        ns = (n,) if n is not None else SIZE_NS
        return [spec(f"size_n{n_}", n_, "cubic", sigma or 0.0, "size_scaled")
                for n_ in ns]
    # target comparison: cubic and random-matrix at the same scale
    n_ = n or 1000
    return [
        spec("target_cubic", n_, "cubic", sigma or 0.0, "base"),
        spec("target_randmat", n_, "randmat", sigma or 0.0, "base",
             d_min=RANDMAT_WIDTH),
    ]
