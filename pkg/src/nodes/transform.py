"""
Transformation Nodes

These nodes convert between the experiment graph's external interface and
its internal state:
- transform_input: ExperimentInput -> ExperimentState
- transform_output: ExperimentState -> ExperimentOutput
"""

import uuid
import logging

from ..models.pipeline_state import ExperimentInput, ExperimentOutput, ExperimentState

logger = logging.getLogger(__name__)


def transform_input(input_data: ExperimentInput) -> ExperimentState:
    """
    Expand the caller's input into a fully initialized state

    Args:
        input_data: Seeds, output directory and optional config sources

    Returns:
        Internal state ready for validation
    """
    seeds = list(input_data.get("seeds", []))
    logger.info(f"Transforming input: seeds={seeds}, output_dir={input_data.get('output_dir')}")

    state: ExperimentState = {
        # ========== Request ==========
        "request_id": str(uuid.uuid4()),
        "seeds": seeds,
        "output_dir": input_data.get("output_dir", ""),
        "config_path": input_data.get("config_path"),
        "overrides": dict(input_data.get("overrides", {})),
        "classifier": input_data.get("classifier", "model"),

        # ========== Validation ==========
        "config": None,
        "is_valid": False,
        "rejection_reason": None,
        "error": None,

        # ========== Artifacts ==========
        "artifacts": {},

        # ========== Measurements ==========
        "classifier_metrics": {},
        "revision_counts": {},
        "reports": {},

        # ========== Results ==========
        "status": None,
        "reason": None,
        "summary": {},
        "summary_paths": {},
    }
    return state


def transform_output(state: ExperimentState) -> ExperimentOutput:
    """Reduce the internal state to status plus summary"""
    if state.get("status") == "rejected":
        output: ExperimentOutput = {"status": "rejected", "reason": state.get("reason") or "unknown"}
    else:
        output = {
            "status": "completed",
            "summary": state.get("summary", {}),
            "summary_paths": state.get("summary_paths", {}),
        }
    logger.info(f"Transforming output: status={output['status']}")
    return output
