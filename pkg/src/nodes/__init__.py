"""Experiment Pipeline Nodes

Each node is one stage of the experiment workflow. Stage nodes never
raise: failures are returned in the `error` field.
"""

from .transform import transform_input, transform_output
from .validate import validate_experiment
from .reject import reject_experiment
from .synthesize import synthesize_corpora
from .train import train_classifier, train_retrievers
from .revise import revise_corpora
from .evaluate import evaluate_runs
from .aggregate import aggregate_results

__all__ = [
    "transform_input",
    "transform_output",
    "validate_experiment",
    "reject_experiment",
    "synthesize_corpora",
    "train_classifier",
    "train_retrievers",
    "revise_corpora",
    "evaluate_runs",
    "aggregate_results",
]
