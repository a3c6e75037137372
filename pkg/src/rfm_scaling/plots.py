"""SVG figures: mean MSE curves with shaded 95% confidence bands.

Rendering is a pure function of the summary rows: the SVG hash salt is
pinned and no timestamp is embedded, so identical input produces identical
bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
from matplotlib.figure import Figure

from . import __version__
from .sweep import SummaryRow

MODEL_COLORS = {"baseline": "tab:red", "rfm": "tab:blue"}


def plot_summary(rows: list[SummaryRow], out_dir: Path | str, log_y: bool = True,
                 metadata: dict[str, str] | None = None) -> list[Path]:
    """One SVG per (experiment, split); returns the written paths."""
    if not rows:
        raise ValueError("no summary rows to plot")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    experiment = rows[0].experiment
    paths = []
    svg_meta = {"Date": None, "Creator": f"rfm-scaling {__version__}"}
    if metadata:
        svg_meta["Description"] = " ".join(f"{k}={v}" for k, v in sorted(metadata.items()))
    with matplotlib.rc_context({"svg.hashsalt": "rfm-scaling"}):
        for split in sorted({r.split for r in rows}):
            fig = Figure(figsize=(8, 5))
            ax = fig.add_subplot(111)
            for model in sorted({r.model for r in rows}):
                series = sorted(
                    (r for r in rows if r.split == split and r.model == model),
                    key=lambda r: r.d,
                )
                if not series:
                    continue
                ds = [r.d for r in series]
                color = MODEL_COLORS.get(model)
                ax.plot(ds, [r.mean_mse for r in series], label=model, color=color)
                ax.fill_between(ds, [r.ci_lo for r in series],
                                [r.ci_hi for r in series], alpha=0.25, color=color)
            if log_y:
                ax.set_yscale("log")
            ax.set_xlabel("feature count d")
            ax.set_ylabel("MSE")
            ax.set_title(f"{experiment} ({split})")
            ax.legend()
            path = out_dir / f"{experiment}_{split}.svg"
            fig.savefig(path, format="svg", metadata=svg_meta)
            paths.append(path)
    return paths
