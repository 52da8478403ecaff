"""
Revise Node

Turns classifier-accepted candidates into weak edges of each seed's
training corpus.
"""

import logging

from ..models.pipeline_state import ExperimentState
from ..pipelines import stages

logger = logging.getLogger(__name__)


def revise_corpora(state: ExperimentState) -> dict:
    config = state["config"]
    artifacts = {key: dict(value) for key, value in state["artifacts"].items()}
    counts = dict(state.get("revision_counts", {}))
    try:
        for seed in state["seeds"]:
            paths = artifacts[str(seed)]
            root = stages.seed_dir(state["output_dir"], seed)
            classifier = stages.load_classifier(paths["classifier"], paths["train"])
            revised = root / "revised" / "manifest.jsonl"
            counts[str(seed)] = stages.revise(
                config, seed, paths["train"], classifier, revised, root / "verdicts.jsonl"
            )
            paths["revised"] = str(revised)
            paths["verdicts"] = str(root / "verdicts.jsonl")
    except Exception as e:
        logger.error(f"Error during revision: {e}")
        return {"error": f"revise: {e}"}

    return {"artifacts": artifacts, "revision_counts": counts}
