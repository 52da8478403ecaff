"""
Gradient-check graphs for the entailment model

Each case pairs a small float64 graph with random inputs and a ParamSet;
run_gradcheck compares backward_grad against central differences for
every case, every seed.
"""

import logging

import numpy as np
import torch
from torch import nn

from .batch import collate
from .examples import make_example
from .gate import GateUnit
from .heads import ClassifierHead
from .loss import branch_nll
from .model import EntailmentModel
from ..diffcore import ops
from ..diffcore.graph import finite_diff_check
from ..diffcore.params import ParamSet
from ..diffcore.primitives import CheckCase, primitive_cases
from ..diffcore.runtime import default_dtype
from ..encoders.cross import CrossEncoder
from ..encoders.image import ImageEncoder
from ..models.config import EncoderConfig

logger = logging.getLogger(__name__)

# Small enough that every component can be perturbed in seconds
TINY_CONFIG = EncoderConfig(
    hidden_dim=8,
    ffn_dim=16,
    num_heads=2,
    text_layers=1,
    image_layers=1,
    cross_layers=1,
    vocab_size=64,
    max_length=12,
    image_size=8,
    channels=1,
    patch_size=4,
)

WORDS = ["red", "cube", "small", "dog", "runs", "blue", "park", "two", "cats", "sleep"]


class TextualHeadGraph(nn.Module):
    def __init__(self, hidden_dim: int, activation: str = "softmax"):
        super().__init__()
        self.head = ClassifierHead(hidden_dim, activation)

    def forward(self, h, labels):
        return {"loss": branch_nll(self.head(h), labels).sum()}


class VisualBranchGraph(nn.Module):
    """Image encoder, cross encoder and the visual head"""

    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.image_encoder = ImageEncoder(config)
        self.cross_encoder = CrossEncoder(config)
        self.head = ClassifierHead(config["hidden_dim"])

    def forward(self, hypothesis_ids, patches, labels):
        states, _ = self.image_encoder(patches)
        h_v = self.cross_encoder(hypothesis_ids, states)[:, 0]
        return {"loss": branch_nll(self.head(h_v), labels).sum()}


class GateGraph(nn.Module):
    def __init__(self, hidden_dim: int):
        super().__init__()
        self.gate = GateUnit(hidden_dim)

    def forward(self, h_t, h_v, direction):
        return {"loss": ops.reduce_sum(self.gate(h_t, h_v) * direction)}


def _random_text(rng: np.random.Generator, words: int) -> str:
    return " ".join(rng.choice(WORDS, size=words))


def _random_examples(rng: np.random.Generator, config: EncoderConfig, count: int = 2):
    shape = (config["image_size"], config["image_size"], config["channels"])
    return [
        make_example(
            "IMAGE_TEXT_TEXT",
            hypothesis=_random_text(rng, 3),
            label=int(rng.integers(0, 2)),
            premise_text=_random_text(rng, 4),
            premise_image=rng.uniform(0.0, 1.0, size=shape).astype(np.float32),
            config=config,
        )
        for _ in range(count)
    ]


def entailment_cases(seed: int, config: EncoderConfig = TINY_CONFIG) -> dict[str, CheckCase]:
    rng = np.random.default_rng(seed)
    torch.manual_seed(seed)
    hidden = config["hidden_dim"]
    batch = collate(_random_examples(rng, config), config, torch.float64)

    cases: dict[str, CheckCase] = {}
    with default_dtype(torch.float64):
        head = TextualHeadGraph(hidden)
        cases["textual_head"] = CheckCase(
            head,
            {"h": torch.randn(3, hidden), "labels": torch.tensor([0, 1, 1])},
            ParamSet.from_module(head, seed),
            ("h",),
        )

        visual = VisualBranchGraph(config)
        cases["visual_branch"] = CheckCase(
            visual,
            {k: batch[k] for k in ("hypothesis_ids", "patches", "labels")},
            ParamSet.from_module(visual, seed),
            (),
        )

        gate = GateGraph(hidden)
        cases["gate"] = CheckCase(
            gate,
            {"h_t": torch.randn(2, hidden), "h_v": torch.randn(2, hidden), "direction": torch.randn(2, hidden)},
            ParamSet.from_module(gate, seed),
            ("h_t", "h_v"),
        )

        model = EntailmentModel(config)
        cases["multimodal"] = CheckCase(model, batch, ParamSet.from_module(model, seed), ())
    return cases


def run_gradcheck(
    seeds: list[int],
    eps: float = 1e-6,
    max_per_tensor: int | None = 8,
    include_primitives: bool = True,
) -> dict[str, float]:
    """
    Worst relative error per case name over all seeds

    The full model exposes its loss as "loss_all"; every other case as "loss".
    """
    worst: dict[str, float] = {}
    for seed in seeds:
        cases = dict(primitive_cases(seed, torch.float64)) if include_primitives else {}
        cases.update(entailment_cases(seed))
        for name, case in cases.items():
            loss_name = "loss_all" if name == "multimodal" else "loss"
            error = finite_diff_check(
                case.graph,
                case.inputs,
                case.params,
                eps=eps,
                loss_name=loss_name,
                wrt_inputs=case.wrt_inputs,
                max_per_tensor=max_per_tensor,
                seed=seed,
            )
            worst[name] = max(worst.get(name, 0.0), error)
    logger.info(f"Gradient check over {len(seeds)} seeds: max relative error {max(worst.values()):.3e}")
    return worst
