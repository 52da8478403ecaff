"""
Indicator-gated joint loss

Each branch loss is a sum of per-example negative log-likelihoods weighted
by that example's indicator, and L_all is the sum of the three.
"""

from typing import TYPE_CHECKING

import torch

from .batch import collate
from ..diffcore.graph import forward_eval
from ..diffcore.params import ParamSet
from ..models.entailment import EntailmentExample, LossBreakdown
from ..models.errors import ExampleValidationError

if TYPE_CHECKING:
    from .model import EntailmentModel

BRANCH_KEYS = ("t", "v", "m")


def branch_nll(logp: torch.Tensor, labels: torch.Tensor) -> torch.Tensor:
    """[B] negative log-likelihood of the true label under [B, 2] log-probabilities"""
    return -logp.gather(-1, labels.long().unsqueeze(-1)).squeeze(-1)


def gated_losses(
    logps: dict[str, torch.Tensor],
    labels: torch.Tensor,
    indicators: torch.Tensor,
) -> dict[str, torch.Tensor]:
    """
    Args:
        logps: "t", "v", "m" -> [B, 2] log-probabilities
        labels: [B]
        indicators: [B, 3] (theta_t, theta_v, theta_m)

    Returns:
        nll_<b> [B] and loss_<b> scalars per branch, plus loss_all
    """
    out: dict[str, torch.Tensor] = {}
    total = None
    for column, key in enumerate(BRANCH_KEYS):
        nll = branch_nll(logps[key], labels)
        loss = (indicators[:, column].to(nll.dtype) * nll).sum()
        out[f"nll_{key}"] = nll
        out[f"loss_{key}"] = loss
        total = loss if total is None else total + loss
    out["loss_all"] = total
    return out


def breakdown(outputs: dict[str, torch.Tensor], indicators: torch.Tensor) -> LossBreakdown:
    """LossBreakdown from model outputs that include the loss terms"""
    return LossBreakdown(
        loss_t=float(outputs["loss_t"]),
        loss_v=float(outputs["loss_v"]),
        loss_m=float(outputs["loss_m"]),
        loss_all=float(outputs["loss_all"]),
        nll_t=outputs["nll_t"].detach().tolist(),
        nll_v=outputs["nll_v"].detach().tolist(),
        nll_m=outputs["nll_m"].detach().tolist(),
        indicators=[tuple(int(v) for v in row) for row in indicators.tolist()],
    )


def joint_loss(
    examples: list[EntailmentExample],
    model: "EntailmentModel",
    params: ParamSet | None = None,
) -> LossBreakdown:
    """
    Raises:
        ExampleValidationError: On an empty batch or a malformed example
    """
    if not examples:
        raise ExampleValidationError("joint_loss needs a non-empty batch")
    dtype = next(model.parameters()).dtype
    inputs = collate(examples, model.config, dtype)
    outputs = forward_eval(model, inputs, params or ParamSet.from_module(model))
    return breakdown(outputs, inputs["indicators"])


def recompute_total(loss: LossBreakdown) -> float:
    """sum_i theta_i . nll_i over the batch, from the stored per-example terms"""
    total = 0.0
    for (t, v, m), a, b, c in zip(loss["indicators"], loss["nll_t"], loss["nll_v"], loss["nll_m"]):
        total += t * a + v * b + m * c
    return total
