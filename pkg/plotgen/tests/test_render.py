"""Rendering: grid shapes, SE bands, and the CLI."""

from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
import pytest

from plotgen.cli import main as cli_main
from plotgen.parse import COLUMNS, Series, parse_csv, serialize_csv
from plotgen.render import _panel, render

GOLDEN = Path(__file__).parent / "data" / "agg__MX2_sigma0.5__LSGD.csv"


def make_series(label="MX2_sigma0.5", optimizer="LSGD", rounds=5, seed=0,
                esterr=True):
    rng = np.random.default_rng(seed)
    data = {"round": np.arange(1, rounds + 1, dtype=np.int64)}
    for name in COLUMNS[1:]:
        data[name] = rng.uniform(0.1, 1.0, size=rounds)
    if not esterr:
        data["esterr_mean"] = np.full(rounds, np.nan)
        data["esterr_se"] = np.full(rounds, np.nan)
    return Series(label=label, optimizer=optimizer, data=data)


def test_band_half_width_equals_se_column():
    series = make_series()
    fig, ax = plt.subplots()
    _panel(ax, [series], "loss_mean", "loss_se", logy=False)
    band = ax.collections[0].get_paths()[0].vertices
    mean, se, x = series.column("loss_mean"), series.column("loss_se"), series.column("round")
    for i in range(len(x)):
        ys = band[np.isclose(band[:, 0], x[i]), 1]
        assert np.isclose(ys.min(), mean[i] - se[i], atol=1e-12)
        assert np.isclose(ys.max(), mean[i] + se[i], atol=1e-12)
    plt.close(fig)


def test_single_layout_writes_png_and_svg(tmp_path):
    written = render([make_series()], tmp_path / "fig.png", layout="single")
    assert [p.suffix for p in written] == [".png", ".svg"]
    assert all(p.exists() and p.stat().st_size > 0 for p in written)


def test_grid_layout_two_by_two(tmp_path):
    series = [make_series(label=f"MX2_sigma{s}", optimizer=opt, seed=i)
              for i, (s, opt) in enumerate(
                  [(0.1, "LSGD"), (0.1, "ASVRCD"), (1, "LSGD"), (1, "ASVRCD")])]
    written = render(series, tmp_path / "grid", layout="grid")
    assert all(p.exists() for p in written)


def test_grid_drops_metric_rows_without_data(tmp_path):
    series = [make_series(esterr=False)]
    written = render(series, tmp_path / "loss-only", layout="grid")
    assert all(p.exists() for p in written)


def test_render_validation(tmp_path):
    with pytest.raises(ValueError, match="at least one series"):
        render([], tmp_path / "x.png")
    with pytest.raises(ValueError, match="layout"):
        render([make_series()], tmp_path / "x.png", layout="mosaic")


def test_cli_renders_from_glob(tmp_path, capsys):
    for sigma in ("0.1", "1"):
        for opt in ("LSGD", "ASVRCD"):
            series = make_series(label=f"MX2_sigma{sigma}", optimizer=opt)
            serialize_csv(series, tmp_path / f"agg__MX2_sigma{sigma}__{opt}.csv")
    out = tmp_path / "fig.png"
    code = cli_main(["--csv", str(tmp_path / "agg__*.csv"), "--out", str(out)])
    assert code == 0
    assert out.exists() and out.with_suffix(".svg").exists()
    assert "wrote" in capsys.readouterr().out


def test_cli_no_match_fails(tmp_path, capsys):
    code = cli_main(["--csv", str(tmp_path / "none__*.csv"),
                     "--out", str(tmp_path / "x.png")])
    assert code == 1
    assert "no CSVs match" in capsys.readouterr().err


def test_cli_parses_golden_single_layout(tmp_path):
    code = cli_main(["--csv", str(GOLDEN), "--out", str(tmp_path / "g.png"),
                     "--layout", "single", "--no-logy"])
    assert code == 0
