"""
Evaluate Node

Ranks each seed's test corpus with both retrieval models and writes one
MetricsReport per (seed, strategy). Entail@K uses the synthetic oracle.
"""

import logging

from .train import STRATEGIES
from ..models.pipeline_state import ExperimentState
from ..pipelines import stages

logger = logging.getLogger(__name__)


def evaluate_runs(state: ExperimentState) -> dict:
    config = state["config"]
    artifacts = {key: dict(value) for key, value in state["artifacts"].items()}
    reports: dict[str, dict[str, str]] = {strategy: {} for strategy in STRATEGIES}
    try:
        for seed in state["seeds"]:
            paths = artifacts[str(seed)]
            root = stages.seed_dir(state["output_dir"], seed)
            for strategy in STRATEGIES:
                runs = stages.rank(paths[f"retrieval-{strategy}"], paths["test"], root / f"runs-{strategy}")
                report_path = root / f"report-{strategy}.json"
                stages.evaluate(config, seed, paths["test"], sorted(runs.values()), report_path)
                reports[strategy][str(seed)] = str(report_path)
    except Exception as e:
        logger.error(f"Error during evaluation: {e}")
        return {"error": f"evaluate: {e}"}

    return {"artifacts": artifacts, "reports": reports}
