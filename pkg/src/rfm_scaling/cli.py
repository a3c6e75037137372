"""Command-line front end.

Subcommands:
  run        execute a preset experiment, write records CSV + metadata
  summarize  reduce records CSV to per-d mean/CI summary CSV
  plot       render SVG curves with confidence bands from a summary CSV
  verify     run the acceptance suite and report pass/fail per criterion

Exit codes: 0 success, 1 usage error, 2 runtime/numerical failure,
3 verification failure.  Worker count comes from $RFM_SCALING_WORKERS
(default: available parallelism).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .acceptance import SUITES, run_acceptance
from .errors import RfmError
from .plots import plot_summary
from .presets import PRESETS, preset_specs
from .store import (
    read_metadata,
    read_records,
    read_summary,
    write_metadata,
    write_records,
    write_summary,
)
from .sweep import run_experiment, summarize


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="rfm-scaling", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version",
                        version=f"rfm-scaling {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    run_p = sub.add_parser("run", help="run a preset experiment")
    run_p.add_argument("--experiment", choices=PRESETS, required=True)
    run_p.add_argument("--n", type=int, help="dataset size override")
    run_p.add_argument("--reps", type=int, help="repetitions (default 10; paper scale 100)")
    run_p.add_argument("--seed", type=int, help="master seed override")
    run_p.add_argument("--sigma", type=float, help="label noise sigma override")
    run_p.add_argument("--bandwidth", type=float, help="Laplace kernel bandwidth")
    run_p.add_argument("--ridge", type=float, help="ridge strength")
    run_p.add_argument("--iterations", type=int, help="metric-update iterations")
    run_p.add_argument("--d-step-dense", type=int, default=1,
                       help="grid step in the dense (low-d) range")
    run_p.add_argument("--d-step-coarse", type=int, default=10,
                       help="grid step in the coarse (high-d) range")
    run_p.add_argument("--out-dir", type=Path, default=Path("results"))

    sum_p = sub.add_parser("summarize", help="summarize records CSV")
    sum_p.add_argument("records", type=Path, nargs="+")

    plot_p = sub.add_parser("plot", help="plot summary CSV as SVG")
    plot_p.add_argument("summary", type=Path, nargs="+")
    plot_p.add_argument("--linear-y", action="store_true",
                        help="linear y axis (default: logarithmic)")
    plot_p.add_argument("--out-dir", type=Path,
                        help="output directory (default: next to the summary)")

    ver_p = sub.add_parser("verify", help="run acceptance criteria")
    ver_p.add_argument("--suite", choices=sorted(SUITES), default="all")
    ver_p.add_argument("--seed", type=int, help="master seed for the shape runs")
    return parser


def _cmd_run(args) -> int:
    specs = preset_specs(
        args.experiment, n=args.n, reps=args.reps, master_seed=args.seed,
        sigma=args.sigma, bandwidth=args.bandwidth, ridge=args.ridge,
        iterations=args.iterations, dense_step=args.d_step_dense,
        coarse_step=args.d_step_coarse,
    )
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for spec in specs:
        print(f"running {spec.name}: n={spec.n}, reps={spec.reps}, "
              f"{len(spec.d_grid)} grid points, sigma={spec.sigma}")
        records = run_experiment(spec)
        records_path = args.out_dir / f"{spec.name}_records.csv"
        write_records(records_path, records)
        hp = spec.train_config.hyperparams
        write_metadata(args.out_dir / f"{spec.name}_meta.txt", {
            "tool_version": __version__,
            "experiment": spec.name,
            "master_seed": spec.master_seed,
            "n": spec.n,
            "sigma": spec.sigma,
            "target": spec.target_kind,
            "reps": spec.reps,
            "iterations": spec.train_config.iterations,
            "val_fraction": spec.train_config.val_fraction,
            "bandwidth": hp.bandwidth,
            "ridge": hp.ridge,
            "dist_floor": hp.dist_floor,
            "d_grid_size": len(spec.d_grid),
            "d_min": spec.d_grid[0],
            "d_max": spec.d_grid[-1],
            "ci_method": "normal_approx_1.96_sem",
        })
        print(f"wrote {records_path}")
    return 0


def _sidecar_meta(path: Path, stem_suffix: str) -> dict[str, str]:
    meta_path = path.with_name(path.name.replace(stem_suffix, "_meta.txt"))
    return read_metadata(meta_path) if meta_path.exists() else {}


def _cmd_summarize(args) -> int:
    for records_path in args.records:
        rows = summarize(read_records(records_path))
        out = records_path.with_name(
            records_path.name.replace("_records.csv", "") + "_summary.csv")
        write_summary(out, rows)
        meta = _sidecar_meta(records_path, "_records.csv")
        if meta:
            write_metadata(out.with_name(out.name.replace(".csv", "_meta.txt")), meta)
        print(f"wrote {out}")
    return 0


def _cmd_plot(args) -> int:
    for summary_path in args.summary:
        rows = read_summary(summary_path)
        out_dir = args.out_dir if args.out_dir is not None else summary_path.parent
        meta = _sidecar_meta(summary_path, "_summary.csv")
        keep = {k: meta[k] for k in ("master_seed", "tool_version") if k in meta}
        for path in plot_summary(rows, out_dir, log_y=not args.linear_y,
                                 metadata=keep or None):
            print(f"wrote {path}")
    return 0


def _cmd_verify(args) -> int:
    kwargs = {"master_seed": args.seed} if args.seed is not None else {}
    results = run_acceptance(args.suite, log=print, **kwargs)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 3 if failed else 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.subcommand == "run":
            return _cmd_run(args)
        if args.subcommand == "summarize":
            return _cmd_summarize(args)
        if args.subcommand == "plot":
            return _cmd_plot(args)
        return _cmd_verify(args)
    except (RfmError, RuntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
