"""
Aggregate Node

Summarizes every seed's reports into mean and standard deviation per
strategy and writes the summary JSON, CSV, plain-text table and chart.
"""

import logging
from pathlib import Path

from ..evalcli.report import aggregate_seeds, read_report
from ..evalcli.tables import plot_metric_bars, pretty_table, summary_frame, write_csv
from ..models.pipeline_state import ExperimentState
from ..utils.jsonl import write_json

logger = logging.getLogger(__name__)


def aggregate_results(state: ExperimentState) -> dict:
    out = Path(state["output_dir"])
    try:
        summary = {
            strategy: aggregate_seeds([read_report(path) for _, path in sorted(per_seed.items())])
            for strategy, per_seed in sorted(state["reports"].items())
        }
        frame = summary_frame(summary)
        paths = {
            "json": str(write_json(out / "summary.json", {
                "retrieval": summary,
                "classifier": state.get("classifier_metrics", {}),
                "revision": state.get("revision_counts", {}),
                "seeds": state["seeds"],
            })),
            "csv": str(write_csv(frame.set_index(["run", "metric"]), out / "summary.csv")),
            "chart": str(plot_metric_bars(frame, out / "summary.svg")),
        }
        table = out / "summary.txt"
        table.write_text(pretty_table(frame.pivot(index="metric", columns="run", values="mean")), encoding="utf-8")
        paths["table"] = str(table)
    except Exception as e:
        logger.error(f"Error during aggregation: {e}")
        return {"error": f"aggregate: {e}"}

    for strategy, metrics in summary.items():
        logger.info(
            f"Strategy {strategy}: "
            + ", ".join(f"{name}={stats['mean']:.3f}±{stats['std']:.3f}" for name, stats in metrics.items())
        )
    return {"summary": summary, "summary_paths": paths, "status": "completed"}
