"""
Validate Experiment Node

Resolves the configuration and checks the request before any artifact is
written. Invalid requests are routed to the reject node.
"""

import logging

from ..models.errors import EntailKitError
from ..models.pipeline_state import ExperimentState
from ..utils.config_manager import ConfigManager

logger = logging.getLogger(__name__)


def validate_experiment(state: ExperimentState) -> dict:
    """
    Returns:
        is_valid and either the resolved config or a rejection reason
    """
    seeds = state.get("seeds", [])
    if not seeds:
        return {"is_valid": False, "rejection_reason": "At least one seed is required"}
    if any(isinstance(s, bool) or not isinstance(s, int) or s < 0 for s in seeds):
        return {"is_valid": False, "rejection_reason": f"Seeds must be non-negative integers, got {seeds}"}
    if len(set(seeds)) != len(seeds):
        return {"is_valid": False, "rejection_reason": f"Seeds must be distinct, got {seeds}"}
    if not state.get("output_dir"):
        return {"is_valid": False, "rejection_reason": "output_dir is required"}
    if state.get("classifier") not in ("model", "oracle"):
        return {"is_valid": False, "rejection_reason": f"Unknown classifier source {state.get('classifier')!r}"}

    try:
        config = ConfigManager.resolve(state.get("config_path"), state.get("overrides"))
    except (EntailKitError, FileNotFoundError) as e:
        logger.info(f"Rejecting experiment: {e}")
        return {"is_valid": False, "rejection_reason": str(e)}

    logger.info(f"Experiment {state.get('request_id')} valid: {len(seeds)} seeds")
    return {"is_valid": True, "config": config}
