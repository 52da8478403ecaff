"""
Experiment Pipeline State

ExperimentInput is what a caller sends, ExperimentOutput what it gets
back; ExperimentState is the internal state flowing between nodes. State
carries artifact paths and metric dicts only, never tensors or corpora.
Seed keys are strings so the state serializes as JSON.
"""

from typing import Any, Literal, TypedDict
try:
    from typing import NotRequired
except ImportError:  # Python < 3.11
    from typing_extensions import NotRequired

from .config import ExperimentConfig

ClassifierSource = Literal["model", "oracle"]


class ExperimentInput(TypedDict):
    """
    Public input of the experiment graph

    classifier "oracle" skips classifier training and revises with the
    synthetic oracle.
    """
    seeds: list[int]
    output_dir: str
    config_path: NotRequired[str]
    overrides: NotRequired[dict[str, Any]]
    classifier: NotRequired[ClassifierSource]


class ExperimentOutput(TypedDict):
    status: Literal["completed", "rejected"]
    reason: NotRequired[str]
    summary: NotRequired[dict[str, dict[str, dict[str, float]]]]
    summary_paths: NotRequired[dict[str, str]]


class ExperimentState(TypedDict):
    # ========== Request ==========
    request_id: str
    seeds: list[int]
    output_dir: str
    config_path: str | None
    overrides: dict[str, Any]
    classifier: ClassifierSource

    # ========== Validation ==========
    config: ExperimentConfig | None
    is_valid: bool
    rejection_reason: str | None
    error: str | None

    # ========== Artifacts (seed -> name -> path) ==========
    artifacts: dict[str, dict[str, str]]

    # ========== Measurements ==========
    classifier_metrics: dict[str, dict[str, float]]    # seed -> "branch.metric" -> value
    revision_counts: dict[str, dict[str, int]]          # seed -> count name -> value
    reports: dict[str, dict[str, str]]                  # strategy -> seed -> report path

    # ========== Results ==========
    status: Literal["completed", "rejected"] | None
    reason: str | None
    summary: dict[str, dict[str, dict[str, float]]]     # strategy -> metric -> mean/std/n
    summary_paths: dict[str, str]
