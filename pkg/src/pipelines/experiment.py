"""
Experiment Pipeline - Graph Assembly

START -> transform_input -> validate -> synthesize -> train_classifier
      -> revise -> train_retrievers -> evaluate -> aggregate
      -> transform_output -> END

Invalid input and any stage error route to reject, which also ends in
transform_output.
"""

import logging
from typing import Callable

from langgraph.graph import StateGraph, START, END
from langchain_core.runnables import RunnableConfig

from ..models.pipeline_state import ExperimentInput, ExperimentOutput, ExperimentState
from ..nodes import (
    transform_input,
    transform_output,
    validate_experiment,
    reject_experiment,
    synthesize_corpora,
    train_classifier,
    revise_corpora,
    train_retrievers,
    evaluate_runs,
    aggregate_results,
)

logger = logging.getLogger(__name__)

# Stage nodes in execution order
STAGES: list[tuple[str, Callable]] = [
    ("synthesize", synthesize_corpora),
    ("train_classifier", train_classifier),
    ("revise", revise_corpora),
    ("train_retrievers", train_retrievers),
    ("evaluate", evaluate_runs),
    ("aggregate", aggregate_results),
]


def _route_on_error(next_node: str) -> Callable[[ExperimentState], str]:
    def route(state: ExperimentState) -> str:
        return "reject" if state.get("error") else next_node
    return route


def create_experiment_graph(config: RunnableConfig | None = None, checkpointer=None):
    """
    Factory function for the experiment graph

    Args:
        config: LangGraph runtime configuration (optional)
        checkpointer: Optional LangGraph checkpointer; callers passing one
            must supply a thread_id when invoking

    Returns:
        Compiled StateGraph taking ExperimentInput and returning ExperimentOutput
    """
    logger.info("Initializing experiment pipeline...")

    graph = StateGraph(ExperimentState, input_schema=ExperimentInput, output_schema=ExperimentOutput)

    # ========== Add Nodes ==========

    graph.add_node("transform_input", transform_input)
    graph.add_node("transform_output", transform_output)
    graph.add_node("validate", validate_experiment)
    graph.add_node("reject", reject_experiment)
    for name, node in STAGES:
        graph.add_node(name, node)

    # ========== Build Graph Flow ==========

    graph.add_edge(START, "transform_input")
    graph.add_edge("transform_input", "validate")

    def route_after_validation(state: ExperimentState) -> str:
        return STAGES[0][0] if state.get("is_valid", False) else "reject"

    graph.add_conditional_edges(
        "validate",
        route_after_validation,
        {STAGES[0][0]: STAGES[0][0], "reject": "reject"},
    )

    for (name, _), (next_name, _) in zip(STAGES, STAGES[1:] + [("transform_output", None)]):
        graph.add_conditional_edges(
            name,
            _route_on_error(next_name),
            {next_name: next_name, "reject": "reject"},
        )

    graph.add_edge("reject", "transform_output")
    graph.add_edge("transform_output", END)

    compiled_graph = graph.compile(checkpointer=checkpointer)
    logger.info("Experiment pipeline initialized successfully")
    return compiled_graph
