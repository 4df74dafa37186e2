"""Grid figures: mean lines with +/- SE bands, one panel per (metric, label)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402 (backend must be set first)

from .parse import Series

METRICS = [("loss", "loss_mean", "loss_se", "training loss"),
           ("esterr", "esterr_mean", "esterr_se", "estimation error")]


def _panel(ax, series_list: list[Series], mean_col: str, se_col: str,
           logy: bool) -> None:
    for series in series_list:
        x = series.column("round")
        mean = series.column(mean_col)
        se = series.column(se_col)
        ax.plot(x, mean, label=series.optimizer, linewidth=1.2)
        ax.fill_between(x, mean - se, mean + se, alpha=0.25, linewidth=0)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("communication rounds")


def _has_metric(series_list: list[Series], mean_col: str) -> bool:
    import numpy as np

    return all(np.isfinite(s.column(mean_col)).all() for s in series_list)


def render(series: list[Series], out, layout: str = "grid",
           logy: bool = True) -> list[Path]:
    """Render the figure and write both PNG and SVG next to ``out``.

    ``layout="grid"`` arranges metric rows x label columns (the paper's
    figure shape); ``layout="single"`` puts every series in one loss panel.
    Returns the written paths.
    """
    if not series:
        raise ValueError("render requires at least one series")
    if layout not in ("grid", "single"):
        raise ValueError(f"unknown layout {layout!r}; expected 'grid' or 'single'")

    if layout == "single":
        fig, ax = plt.subplots(figsize=(5, 4))
        _panel(ax, series, "loss_mean", "loss_se", logy)
        ax.set_ylabel("training loss")
        ax.legend(fontsize=8)
    else:
        sigma_of = {s.label: s.sigma for s in series}

        def order(label: str):
            sigma = sigma_of[label]
            return (0.0 if sigma is None else sigma, label)

        labels = sorted({s.label for s in series}, key=order)
        metrics = [m for m in METRICS if _has_metric(series, m[1])]
        if not metrics:
            metrics = METRICS[:1]
        fig, axes = plt.subplots(
            len(metrics), len(labels),
            figsize=(4 * len(labels), 3 * len(metrics)),
            squeeze=False,
        )
        for col, label in enumerate(labels):
            group = [s for s in series if s.label == label]
            for row, (_, mean_col, se_col, title) in enumerate(metrics):
                ax = axes[row][col]
                _panel(ax, group, mean_col, se_col, logy)
                if col == 0:
                    ax.set_ylabel(title)
                if row == 0:
                    sigma = group[0].sigma
                    ax.set_title(label if sigma is None else f"sigma_h = {sigma:g}")
        axes[0][0].legend(fontsize=8)
    fig.tight_layout()

    out = Path(out)
    written = []
    for suffix in (".png", ".svg"):
        target = out if out.suffix == suffix else out.with_suffix(suffix)
        fig.savefig(target)
        written.append(target)
    plt.close(fig)
    return written
