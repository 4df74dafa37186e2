"""Golden-file parsing and lossless round-trip."""

from pathlib import Path

import numpy as np
import pytest

from plotgen.parse import COLUMNS, SchemaError, Series, parse_csv, serialize_csv

GOLDEN = Path(__file__).parent / "data" / "agg__MX2_sigma0.5__LSGD.csv"


def test_golden_file_parses_to_expected_arrays():
    series = parse_csv(GOLDEN)
    assert series.label == "MX2_sigma0.5"
    assert series.optimizer == "LSGD"
    assert series.sigma == 0.5
    assert series.column("round").tolist() == [1, 2, 3]
    assert series.column("loss_mean").tolist() == [0.6931471805599453, 0.5, 0.375]
    assert series.column("loss_se").tolist() == [0.01, 0.005, 0.0025]
    assert series.column("esterr_mean").tolist() == [1.5, 1.25, 1.0]
    assert series.column("esterr_se").tolist() == [0.2, 0.15, 0.1]
    assert series.column("comm").tolist() == [1.0, 2.0, 3.0]
    assert series.column("gw").tolist() == [10.0, 20.0, 30.0]


def test_round_trip_is_lossless(tmp_path):
    series = parse_csv(GOLDEN)
    rewritten = tmp_path / "agg__MX2_sigma0.5__LSGD.csv"
    serialize_csv(series, rewritten)
    back = parse_csv(rewritten)
    for name in COLUMNS:
        assert np.max(np.abs(back.column(name) - series.column(name))) <= 1e-12
        assert np.array_equal(back.column(name), series.column(name))


def test_random_series_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    data = {"round": np.arange(1, 8, dtype=np.int64)}
    for name in COLUMNS[1:]:
        data[name] = rng.uniform(0, 10, size=7)
    series = Series(label="X_sigma1", optimizer="ASCD", data=data)
    path = tmp_path / "agg__X_sigma1__ASCD.csv"
    serialize_csv(series, path)
    back = parse_csv(path)
    for name in COLUMNS[1:]:
        assert np.array_equal(back.column(name), data[name])


def test_sigma_absent_for_plain_labels(tmp_path):
    target = tmp_path / "agg__adult__LSGD.csv"
    target.write_bytes(GOLDEN.read_bytes())
    series = parse_csv(target)
    assert series.label == "adult" and series.sigma is None


def test_schema_errors(tmp_path):
    bad = tmp_path / "agg__x__y.csv"
    bad.write_text("round,loss\n1,2.0\n")
    with pytest.raises(SchemaError, match="missing"):
        parse_csv(bad)
    bad.write_text(",".join(COLUMNS) + "\n1,2\n")
    with pytest.raises(SchemaError, match="fields"):
        parse_csv(bad)
    bad.write_text(",".join(COLUMNS) + "\n1,a,0,0,0,0,0,0\n")
    with pytest.raises(SchemaError, match="line 2"):
        parse_csv(bad)
    bad.write_text(",".join(COLUMNS) + "\n")
    with pytest.raises(SchemaError, match="no data rows"):
        parse_csv(bad)
    bad.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        parse_csv(bad)
