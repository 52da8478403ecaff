"""
Training Nodes

train_classifier fits the multi-modal entailment classifier per seed (or
selects the synthetic oracle); train_retrievers fits one dual encoder per
seed with the entailment strategy on and one with it off.
"""

import logging

from ..models.pipeline_state import ExperimentState
from ..pipelines import stages

logger = logging.getLogger(__name__)

STRATEGIES = ("on", "off")
REPORTED = ("accuracy", "precision", "recall", "f_beta")


def train_classifier(state: ExperimentState) -> dict:
    """
    Returns:
        Updated artifacts (classifier checkpoint or "oracle") and held-out
        metrics flattened to "branch.metric"
    """
    config = state["config"]
    artifacts = {key: dict(value) for key, value in state["artifacts"].items()}
    metrics = dict(state.get("classifier_metrics", {}))

    if state.get("classifier") == "oracle":
        for seed in state["seeds"]:
            artifacts[str(seed)]["classifier"] = "oracle"
        logger.info("Using the synthetic oracle as classifier")
        return {"artifacts": artifacts}

    try:
        for seed in state["seeds"]:
            paths = artifacts[str(seed)]
            checkpoint = stages.seed_dir(state["output_dir"], seed) / "classifier.ckpt"
            results = stages.train_classifier(config, seed, paths["train"], checkpoint, paths["test"])
            paths["classifier"] = str(checkpoint)
            metrics[str(seed)] = {
                f"{branch}.{name}": float(result[name])
                for branch, result in sorted(results.items())
                for name in REPORTED
            }
    except Exception as e:
        logger.error(f"Error during classifier training: {e}")
        return {"error": f"train_classifier: {e}"}

    return {"artifacts": artifacts, "classifier_metrics": metrics}


def train_retrievers(state: ExperimentState) -> dict:
    config = state["config"]
    artifacts = {key: dict(value) for key, value in state["artifacts"].items()}
    try:
        for seed in state["seeds"]:
            paths = artifacts[str(seed)]
            for strategy in STRATEGIES:
                checkpoint = stages.seed_dir(state["output_dir"], seed) / f"retrieval-{strategy}.ckpt"
                stages.train_retriever(config, seed, paths["revised"], strategy, checkpoint)
                paths[f"retrieval-{strategy}"] = str(checkpoint)
    except Exception as e:
        logger.error(f"Error during retrieval training: {e}")
        return {"error": f"train_retrievers: {e}"}

    logger.info(f"Trained {len(STRATEGIES) * len(state['seeds'])} retrieval models")
    return {"artifacts": artifacts}
