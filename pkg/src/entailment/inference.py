"""
Inference and classifier evaluation
"""

import logging
from typing import TypedDict

import torch

from .batch import collate
from .examples import validate_example
from .model import EntailmentModel
from ..diffcore.graph import forward_eval
from ..diffcore.params import ParamSet
from ..evalcli.metrics import classification_metrics
from ..models.entailment import (
    Branch,
    EntailmentExample,
    EntailmentVerdict,
    FORM_BRANCH,
)
from ..models.report import ClassificationMetrics

logger = logging.getLogger(__name__)

BRANCH_KEY: dict[str, str] = {"textual": "t", "visual": "v", "multimodal": "m"}
BRANCHES: tuple[Branch, ...] = ("textual", "visual", "multimodal")


class ForwardResult(TypedDict):
    verdicts: dict[Branch, EntailmentVerdict]
    hidden: dict[str, torch.Tensor]   # "h_t", "h_v", "h_m" for the active branches


def make_verdict(
    p_entail: float,
    threshold: float,
    branch: Branch,
    ex: EntailmentExample | None = None,
) -> EntailmentVerdict:
    """ENTAIL iff p_entail >= threshold"""
    verdict = EntailmentVerdict(
        p_entail=p_entail,
        decision="ENTAIL" if p_entail >= threshold else "NON_ENTAIL",
        threshold=threshold,
        branch=branch,
    )
    if ex is not None:
        for key in ("premise_image_id", "hypothesis_id"):
            if key in ex:
                verdict[key] = ex[key]
    return verdict


def active_branches(ex: EntailmentExample) -> list[Branch]:
    return [branch for branch, on in zip(BRANCHES, ex["indicators"]) if on]


def _outputs(examples: list[EntailmentExample], model: EntailmentModel, params: ParamSet | None):
    dtype = next(model.parameters()).dtype
    inputs = collate(examples, model.config, dtype, with_labels=False)
    return forward_eval(model, inputs, params or ParamSet.from_module(model))


def forward_example(
    ex: EntailmentExample,
    model: EntailmentModel,
    threshold: float = 0.5,
    params: ParamSet | None = None,
) -> ForwardResult:
    """
    Verdicts and hidden states of every active branch of one example

    Raises:
        ExampleValidationError: If the example violates the task-form rules
    """
    validate_example(ex, model.config)
    outputs = _outputs([ex], model, params)
    verdicts: dict[Branch, EntailmentVerdict] = {}
    hidden: dict[str, torch.Tensor] = {}
    for branch in active_branches(ex):
        key = BRANCH_KEY[branch]
        p = float(outputs[f"logp_{key}"][0, 1].exp())
        verdicts[branch] = make_verdict(p, threshold, branch, ex)
        hidden[f"h_{key}"] = outputs[f"h_{key}"][0]
    return ForwardResult(verdicts=verdicts, hidden=hidden)


def predict(
    ex: EntailmentExample,
    model: EntailmentModel,
    threshold: float = 0.5,
    branch: Branch | None = None,
    params: ParamSet | None = None,
) -> EntailmentVerdict:
    """
    Verdict from the task form's own head, or from an explicit branch

    An explicit branch reproduces single-branch baselines on multi-modal
    examples (textual head only, visual head only).
    """
    return predict_batch([ex], model, threshold, branch, params)[0]


def predict_batch(
    examples: list[EntailmentExample],
    model: EntailmentModel,
    threshold: float = 0.5,
    branch: Branch | None = None,
    params: ParamSet | None = None,
    batch_size: int = 64,
) -> list[EntailmentVerdict]:
    verdicts: list[EntailmentVerdict] = []
    for start in range(0, len(examples), batch_size):
        chunk = examples[start:start + batch_size]
        outputs = _outputs(chunk, model, params)
        for row, ex in enumerate(chunk):
            chosen = branch or FORM_BRANCH[ex["task_form"]]
            p = float(outputs[f"logp_{BRANCH_KEY[chosen]}"][row, 1].exp())
            verdicts.append(make_verdict(p, threshold, chosen, ex))
    return verdicts


def evaluate_classifier(
    examples: list[EntailmentExample],
    model: EntailmentModel,
    threshold: float = 0.5,
    beta: float = 0.5,
) -> dict[str, ClassificationMetrics]:
    """
    Metrics per branch over the examples that branch is active on, plus
    "default" (each example judged by its own task form's head)
    """
    results: dict[str, ClassificationMetrics] = {}
    default = predict_batch(examples, model, threshold)
    results["default"] = classification_metrics(default, [ex["label"] for ex in examples], beta)

    for branch in BRANCHES:
        subset = [ex for ex in examples if branch in active_branches(ex)]
        if not subset:
            continue
        verdicts = predict_batch(subset, model, threshold, branch=branch)
        results[branch] = classification_metrics(verdicts, [ex["label"] for ex in subset], beta)

    logger.info(
        "Classifier evaluation: "
        + ", ".join(f"{name} acc={m['accuracy']:.3f} F{beta}={m['f_beta']:.3f}" for name, m in results.items())
    )
    return results
