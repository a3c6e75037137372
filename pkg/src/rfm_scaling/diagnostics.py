"""Optional run-wide numerical diagnostics.

The kernel solver and the metric update report into an active capture
context (if any).  Captures are process-local; the sweep harness opens one
per worker cell and merges the summaries afterwards.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass, field

import numpy as np

# Relative tolerance for the PSD check: smallest eigenvalue >= -PSD_TOL * largest.
PSD_TOL = 1e-10
SYM_TOL = 1e-12


@dataclass
class RunDiagnostics:
    """Aggregated evidence from solver-residual and metric checks."""

    solve_count: int = 0
    max_solve_residual_ratio: float = 0.0
    metric_count: int = 0
    max_metric_asymmetry: float = 0.0
    metric_psd_failures: int = 0
    check_metrics: bool = field(default=True, repr=False)

    def merge(self, other: "RunDiagnostics") -> None:
        self.solve_count += other.solve_count
        self.max_solve_residual_ratio = max(
            self.max_solve_residual_ratio, other.max_solve_residual_ratio
        )
        self.metric_count += other.metric_count
        self.max_metric_asymmetry = max(
            self.max_metric_asymmetry, other.max_metric_asymmetry
        )
        self.metric_psd_failures += other.metric_psd_failures


_active: RunDiagnostics | None = None


@contextlib.contextmanager
def capture(check_metrics: bool = True):
    """Collect diagnostics from all solves/metric updates inside the block."""
    global _active
    previous = _active
    diag = RunDiagnostics(check_metrics=check_metrics)
    _active = diag
    try:
        yield diag
    finally:
        _active = previous


def record_solve(residual_ratio: float) -> None:
    if _active is not None:
        _active.solve_count += 1
        if residual_ratio > _active.max_solve_residual_ratio:
            _active.max_solve_residual_ratio = residual_ratio


def metric_is_psd(metric: np.ndarray) -> bool:
    """Certify smallest eigenvalue >= -PSD_TOL * largest.

    Fast path: Cholesky of M + shift*I with shift = PSD_TOL * (a lower bound
    on the largest eigenvalue); success certifies the property with a margin
    stricter than the stated tolerance.  On failure the exact eigenvalue
    check decides.
    """
    lam_max_lb = float(np.max(metric.diagonal(), initial=0.0))
    shift = PSD_TOL * lam_max_lb
    if shift > 0.0:
        try:
            np.linalg.cholesky(metric + shift * np.eye(metric.shape[0]))
            return True
        except np.linalg.LinAlgError:
            pass
    w = np.linalg.eigvalsh(metric)
    return w[0] >= -PSD_TOL * max(w[-1], 0.0)


def record_metric(metric: np.ndarray) -> None:
    if _active is None:
        return
    _active.metric_count += 1
    asym = float(np.max(np.abs(metric - metric.T), initial=0.0))
    if asym > _active.max_metric_asymmetry:
        _active.max_metric_asymmetry = asym
    if _active.check_metrics and not metric_is_psd(metric):
        _active.metric_psd_failures += 1


def metrics_checked() -> bool:
    """True when an active capture wants full (materialized) metric checks."""
    return _active is not None and _active.check_metrics
