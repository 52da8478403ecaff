"""
One contrastive update

The per-step learning rate comes from a LambdaLR over the planned
batches, so a weak batch at lr_scale alpha is trained at alpha times the
scheduled rate. An explicit lr_effective overrides it for one step.
"""

import math
from typing import NamedTuple

import torch
from torch.optim.lr_scheduler import LambdaLR

from .dual_encoder import DualEncoder, image_tensor, caption_tensor
from .graph import EntailmentGraph, filter_negative
from ..models.corpus import RetrievalCorpus
from ..models.errors import ConfigError, DivergenceError
from ..models.retrieval import Pair


class StepResult(NamedTuple):
    loss: float
    masked_negatives: int
    usable: torch.Tensor  # [B, B] mask the step trained with


def negative_mask(pairs: list[Pair], graph: EntailmentGraph | None) -> torch.Tensor:
    """
    [B, B] usable entries; (i, j) is False when caption j is gold or
    entailed for image i. The diagonal is always True. Without a graph
    every entry is usable.
    """
    size = len(pairs)
    usable = torch.ones(size, size, dtype=torch.bool)
    if graph is None:
        return usable
    for i, (image_id, _) in enumerate(pairs):
        for j, (_, caption_id) in enumerate(pairs):
            if i != j and not filter_negative(image_id, caption_id, graph):
                usable[i, j] = False
    return usable


def build_optimizer(model: DualEncoder, name: str, lr: float, weight_decay: float = 0.02) -> torch.optim.Optimizer:
    """AdamW, or plain gradient descent ("sgd": no momentum, no weight decay)"""
    if name == "adamw":
        return torch.optim.AdamW(model.parameters(), lr=lr, weight_decay=weight_decay)
    if name == "sgd":
        return torch.optim.SGD(model.parameters(), lr=lr, momentum=0.0, weight_decay=0.0)
    raise ConfigError(f"Unsupported optimizer: {name}. Choose 'adamw' or 'sgd'")


def build_scheduler(
    optimizer: torch.optim.Optimizer,
    lr_scales: list[float],
    schedule: str = "constant",
) -> LambdaLR:
    """
    Per-step learning rate: base * schedule(step) * lr_scales[step]

    lr_scales holds one entry per planned batch, in training order.
    """
    if schedule not in ("constant", "cosine"):
        raise ConfigError(f"Unsupported lr schedule: {schedule}. Choose 'constant' or 'cosine'")
    total = max(1, len(lr_scales))

    def factor(step: int) -> float:
        scale = lr_scales[step] if step < len(lr_scales) else 1.0
        if schedule == "cosine":
            return 0.5 * (1.0 + math.cos(math.pi * step / total)) * scale
        return scale

    return LambdaLR(optimizer, factor)


def contrastive_step(
    model: DualEncoder,
    optimizer: torch.optim.Optimizer,
    corpus: RetrievalCorpus,
    pairs: list[Pair],
    graph: EntailmentGraph | None,
    lr_effective: float | None = None,
) -> StepResult:
    """
    One optimizer step on the symmetric in-batch loss

    Steps at lr_effective when given, otherwise at the rate already set
    on the optimizer's parameter groups. The model's parameters are updated in place. A row left with no
    negatives contributes only its positive term (zero loss).

    Raises:
        DivergenceError: If the loss is NaN or infinite
    """
    config = model.config
    dtype = model.log_temperature.dtype
    patches = image_tensor(corpus, [img for img, _ in pairs], config["patch_size"], dtype)
    ids = caption_tensor(corpus, [cap for _, cap in pairs], config["vocab_size"], config["max_length"])
    usable = negative_mask(pairs, graph)

    if lr_effective is not None:
        for param_group in optimizer.param_groups:
            param_group["lr"] = lr_effective
    optimizer.zero_grad()
    loss = model(patches, ids, usable)["loss"]
    if not torch.isfinite(loss):
        raise DivergenceError(f"Contrastive loss is {float(loss)} on a batch of {len(pairs)} pairs")
    loss.backward()
    optimizer.step()
    return StepResult(float(loss), int((~usable).sum()), usable)
