"""
Reject Node

Reached when validation fails or any stage records an error.
"""

import logging

from ..models.pipeline_state import ExperimentState

logger = logging.getLogger(__name__)


def reject_experiment(state: ExperimentState) -> dict:
    reason = state.get("rejection_reason") or state.get("error") or "Experiment failed"
    logger.info(f"Rejecting experiment: {reason}")
    return {"status": "rejected", "reason": reason}
