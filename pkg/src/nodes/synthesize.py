"""
Synthesize Node

Generates the planted-cluster train and test corpora for every seed.
"""

import logging

from ..models.pipeline_state import ExperimentState
from ..pipelines import stages

logger = logging.getLogger(__name__)


def synthesize_corpora(state: ExperimentState) -> dict:
    config = state["config"]
    artifacts = {key: dict(value) for key, value in state.get("artifacts", {}).items()}
    try:
        for seed in state["seeds"]:
            paths = stages.synthesize(config, seed, stages.seed_dir(state["output_dir"], seed))
            artifacts.setdefault(str(seed), {}).update(paths)
    except Exception as e:
        logger.error(f"Error during synthesis: {e}")
        return {"error": f"synthesize: {e}"}

    logger.info(f"Synthesized corpora for {len(state['seeds'])} seeds")
    return {"artifacts": artifacts}
