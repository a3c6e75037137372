from pathlib import Path

import pytest

from rfm_scaling.cli import main
from rfm_scaling.store import read_metadata, read_records, read_summary

TINY_RUN = ["run", "--experiment", "base", "--n", "100", "--reps", "2",
            "--seed", "7", "--d-step-dense", "40", "--d-step-coarse", "800"]


@pytest.fixture(scope="module")
def tiny_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("tiny")
    assert main(TINY_RUN + ["--out-dir", str(out)]) == 0
    return out


def test_usage_error_exit_code(capsys):
    assert main(["run", "--experiment", "nope"]) == 1
    assert main(["bogus"]) == 1


def test_run_writes_records_and_metadata(tiny_out):
    records = read_records(tiny_out / "base_records.csv")
    # grid {5,45,85} | {100,900,1700}: 6 points x 2 reps x 4 rows
    assert len(records) == 48
    meta = read_metadata(tiny_out / "base_meta.txt")
    assert meta["master_seed"] == "7"
    assert meta["tool_version"]
    assert meta["ci_method"] == "normal_approx_1.96_sem"


def test_run_is_byte_deterministic(tiny_out, tmp_path):
    assert main(TINY_RUN + ["--out-dir", str(tmp_path)]) == 0
    a = (tiny_out / "base_records.csv").read_bytes()
    b = (tmp_path / "base_records.csv").read_bytes()
    assert a == b


def test_summarize_single_rep_collapses_ci(tmp_path):
    assert main(TINY_RUN[:6] + ["1", "--seed", "7", "--d-step-dense", "40",
                                "--d-step-coarse", "800",
                                "--out-dir", str(tmp_path)]) == 0
    assert main(["summarize", str(tmp_path / "base_records.csv")]) == 0
    rows = read_summary(tmp_path / "base_summary.csv")
    assert rows
    for row in rows:
        assert row.ci_lo == row.mean_mse == row.ci_hi


def test_summarize_and_plot_pipeline(tiny_out):
    assert main(["summarize", str(tiny_out / "base_records.csv")]) == 0
    summary = tiny_out / "base_summary.csv"
    assert summary.exists()
    assert (tiny_out / "base_summary_meta.txt").exists()
    assert main(["plot", str(summary)]) == 0
    for split in ("train", "test"):
        svg = tiny_out / f"base_{split}.svg"
        assert svg.exists()
        content = svg.read_bytes()
        assert content.startswith(b"<?xml")
        assert b"master_seed=7" in content


def test_plot_is_byte_deterministic(tiny_out, tmp_path):
    summary = tiny_out / "base_summary.csv"
    assert main(["plot", str(summary), "--out-dir", str(tmp_path)]) == 0
    first = (tmp_path / "base_test.svg").read_bytes()
    assert main(["plot", str(summary), "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "base_test.svg").read_bytes() == first


def test_missing_file_is_runtime_error(tmp_path):
    assert main(["summarize", str(tmp_path / "absent.csv")]) == 2
