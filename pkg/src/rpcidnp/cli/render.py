"""Static charts from result CSVs."""

import logging
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from ..errors import UsageError  # noqa: E402


logger = logging.getLogger(__name__)


def _plot_series(frame: pd.DataFrame, ax_grid) -> None:
    columns = [c for c in frame.columns if c != "t"]
    for ax, column in zip(ax_grid, columns):
        ax.plot(frame["t"], frame[column], linewidth=1.0)
        ax.set_ylabel(column)
    ax_grid[-1].set_xlabel("t (ns)")


def _plot_mc(frame: pd.DataFrame, axes) -> None:
    for ax, name in zip(axes, ("iz", "qs")):
        mean, se = frame[f"mean_{name}"], frame[f"se_{name}"]
        ax.plot(frame["t"], mean, linewidth=1.0)
        ax.fill_between(frame["t"], mean - 3 * se, mean + 3 * se, alpha=0.3, linewidth=0)
        ax.set_ylabel(f"mean_{name} ± 3 se")
    axes[-1].set_xlabel("t (ns)")


def render_csv(csv_path: Union[str, Path], out_path: Optional[Union[str, Path]] = None) -> Path:
    """
    Draw the columns of a result CSV and save the chart.

    Time-series CSVs get one panel per column, Monte-Carlo CSVs get mean
    with a 3-standard-error band, scan CSVs get peak and enhancement versus
    the scanned value, pendulum CSVs get displacement and survival.

    Args:
        csv_path: CSV written by simulate, mc, scan or pendulum
        out_path: Image path (default: CSV path with .svg suffix)

    Returns:
        Path of the written image

    Raises:
        UsageError: If the CSV layout is not recognized
    """
    csv_path = Path(csv_path)
    frame = pd.read_csv(csv_path)
    out_path = Path(out_path) if out_path else csv_path.with_suffix(".svg")
    columns = set(frame.columns)

    if {"mean_iz", "se_iz", "mean_qs", "se_qs"} <= columns:
        fig, axes = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
        _plot_mc(frame, axes)
    elif {"value", "peak_iz", "enhancement"} <= columns:
        fig, axes = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
        axes[0].plot(frame["value"], frame["peak_iz"].abs(), marker="o")
        axes[0].set_ylabel("|peak_iz|")
        axes[1].plot(frame["value"], frame["enhancement"], marker="o")
        axes[1].set_ylabel("enhancement")
        for ax in axes:
            ax.set_xscale("log")
            ax.set_yscale("log")
        axes[-1].set_xlabel("value")
    elif "t" in columns and len(columns) > 1:
        n_panels = len(columns) - 1
        fig, axes = plt.subplots(n_panels, 1, sharex=True, figsize=(7, 1.6 * n_panels + 1), squeeze=False)
        _plot_series(frame, axes[:, 0])
    else:
        raise UsageError(f"Unrecognized CSV layout in {csv_path}: columns {list(frame.columns)}")

    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    logger.info(f"Rendered {csv_path} to {out_path}")
    return out_path
