import numpy as np
import pytest

from rfm_scaling.store import (
    RECORD_FIELDS,
    SUMMARY_FIELDS,
    read_metadata,
    read_records,
    read_summary,
    records_to_csv,
    write_metadata,
    write_records,
    write_summary,
)
from rfm_scaling.sweep import SummaryRow, SweepRecord, summarize


def sample_records():
    rng = np.random.default_rng(0)
    return [
        SweepRecord("exp", rep, 60, d, 0.01, "cubic", model, split,
                    float(rng.uniform(0, 1)), 3, 12345678901234567890 % 2**64)
        for rep in range(2)
        for d in (5, 8)
        for model in ("baseline", "rfm")
        for split in ("test", "train")
    ]


def test_records_round_trip(tmp_path):
    records = sample_records()
    path = tmp_path / "records.csv"
    write_records(path, records)
    assert read_records(path) == records


def test_records_header_exact(tmp_path):
    path = tmp_path / "records.csv"
    write_records(path, sample_records())
    first_line = path.read_text().splitlines()[0]
    assert first_line == ",".join(RECORD_FIELDS)
    assert first_line == "experiment,rep,n,d,sigma,target,model,split,mse,best_iter,seed"


def test_records_bytes_use_lf_only(tmp_path):
    path = tmp_path / "records.csv"
    write_records(path, sample_records())
    assert b"\r" not in path.read_bytes()


def test_float_serialization_shortest_round_trip():
    csv_text = records_to_csv(sample_records()[:1])
    value = csv_text.splitlines()[1].split(",")[8]
    assert float(value) == sample_records()[0].mse


def test_summary_round_trip(tmp_path):
    rows = summarize(sample_records())
    path = tmp_path / "summary.csv"
    write_summary(path, rows)
    assert read_summary(path) == rows
    header = path.read_text().splitlines()[0]
    assert header == ",".join(SUMMARY_FIELDS)
    assert header == "experiment,d,model,split,n_reps,mean_mse,std_mse,sem,ci_lo,ci_hi"


def test_summary_rows_are_consistent():
    for row in summarize(sample_records()):
        assert row.ci_lo <= row.mean_mse <= row.ci_hi
        assert row.ci_hi - row.mean_mse == pytest.approx(1.96 * row.sem, abs=1e-15)


def test_metadata_round_trip(tmp_path):
    path = tmp_path / "meta.txt"
    data = {"tool_version": "0.1.0", "master_seed": 2023, "sigma": 0.001}
    write_metadata(path, data)
    loaded = read_metadata(path)
    assert loaded["tool_version"] == "0.1.0"
    assert int(loaded["master_seed"]) == 2023
    assert float(loaded["sigma"]) == 0.001
