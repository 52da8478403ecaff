"""
CSV tables, plain-text tables and SVG charts

Charts are written with a fixed hash salt and without a date so the same
numbers always give the same bytes.
"""

import logging
from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd

logger = logging.getLogger(__name__)

matplotlib.rcParams.update({
    "svg.hashsalt": "entailkit",
    "font.family": "DejaVu Sans",
    "axes.unicode_minus": False,
})


def metrics_frame(rows: Mapping[str, Mapping[str, float]]) -> pd.DataFrame:
    """One row per named run (e.g. strategy on / off), one column per metric"""
    frame = pd.DataFrame.from_dict({name: dict(values) for name, values in rows.items()}, orient="index")
    frame = frame.reindex(sorted(frame.columns), axis=1).sort_index()
    frame.index.name = "run"
    return frame


def summary_frame(summaries: Mapping[str, Mapping[str, Mapping[str, float]]]) -> pd.DataFrame:
    """
    Long table of multi-seed aggregates

    Args:
        summaries: run name -> metric -> {"mean", "std", "n"}
    """
    records = [
        {"run": run, "metric": metric, "mean": stats["mean"], "std": stats["std"], "n": int(stats["n"])}
        for run, per_metric in sorted(summaries.items())
        for metric, stats in sorted(per_metric.items())
    ]
    return pd.DataFrame.from_records(records, columns=["run", "metric", "mean", "std", "n"])


def write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, float_format="%.6f", lineterminator="\n")
    return path


def pretty_table(frame: pd.DataFrame) -> str:
    return frame.to_string(float_format=lambda v: f"{100 * v:.2f}") + "\n"


def plot_metric_bars(
    summary: pd.DataFrame,
    path: str | Path,
    metrics: Sequence[str] | None = None,
    title: str = "Retrieval metrics (mean over seeds)",
) -> Path:
    """Grouped bars per metric, one bar per run, std as error bars"""
    if metrics is not None:
        summary = summary[summary["metric"].isin(metrics)]
    means = summary.pivot(index="metric", columns="run", values="mean").sort_index()
    stds = summary.pivot(index="metric", columns="run", values="std").reindex_like(means)

    fig, ax = plt.subplots(figsize=(8, 3.6), constrained_layout=True)
    means.mul(100).plot.bar(ax=ax, yerr=stds.mul(100), capsize=3, rot=0)
    ax.set_ylabel("%")
    ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    return _save(fig, path)


def plot_training_curve(log: Sequence[Mapping[str, float]], path: str | Path, key: str = "loss") -> Path:
    frame = pd.DataFrame.from_records(list(log))
    fig, ax = plt.subplots(figsize=(6, 3.2), constrained_layout=True)
    if "batch_kind" in frame:
        for kind, part in frame.groupby("batch_kind", sort=True):
            ax.plot(part["step"], part[key], marker=".", linewidth=1, label=str(kind))
        ax.legend(loc="best", fontsize=8)
    elif not frame.empty:
        ax.plot(frame["step"], frame[key], linewidth=1)
    ax.set_xlabel("step")
    ax.set_ylabel(key)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote chart {path}")
    return path
