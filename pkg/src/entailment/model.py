"""
Multi-modal entailment model

Textual branch: text encoder over [CLS] premise [SEP] hypothesis.
Visual branch: image encoder, then the cross encoder over the hypothesis.
Multi-modal branch: gate fusion of both hidden states.
All three branches run for every example; the indicators gate the losses.
"""

import logging

import numpy as np
import torch
from torch import nn

from .gate import GateUnit
from .heads import ClassifierHead
from .loss import gated_losses
from ..diffcore.runtime import default_dtype
from ..encoders.cross import CrossEncoder
from ..encoders.image import ImageEncoder
from ..encoders.patches import patchify
from ..encoders.text import TextEncoder
from ..models.config import EncoderConfig, encoder_config
from ..models.inputs import AttentionProfile, PatchGrid

logger = logging.getLogger(__name__)


class EntailmentModel(nn.Module):
    def __init__(
        self,
        config: EncoderConfig,
        head_activation: str = "softmax",
        share_text_encoder: bool = False,
    ):
        super().__init__()
        self.config = encoder_config(config)
        self.head_activation = head_activation
        self.share_text_encoder = share_text_encoder
        hidden = config["hidden_dim"]

        # Shared mode reads the textual branch off the cross encoder's text layers
        self.text_encoder = None if share_text_encoder else TextEncoder(config)
        self.image_encoder = ImageEncoder(config)
        self.cross_encoder = CrossEncoder(config)
        self.gate = GateUnit(hidden)
        self.textual_head = ClassifierHead(hidden, head_activation)
        self.visual_head = ClassifierHead(hidden, head_activation)
        self.multimodal_head = ClassifierHead(hidden, head_activation)

    def encode_textual(self, pair_ids: torch.Tensor, pair_segments: torch.Tensor) -> torch.Tensor:
        if self.text_encoder is None:
            return self.cross_encoder(pair_ids, None, pair_segments)[:, 0]
        return self.text_encoder(pair_ids, pair_segments)[:, 0]

    def forward(
        self,
        pair_ids: torch.Tensor,
        pair_segments: torch.Tensor,
        hypothesis_ids: torch.Tensor,
        patches: torch.Tensor,
        labels: torch.Tensor | None = None,
        indicators: torch.Tensor | None = None,
    ) -> dict[str, torch.Tensor]:
        """
        Returns:
            h_t, h_v, h_m [B, D]; logp_t, logp_v, logp_m [B, 2];
            attention [B, P]; with labels and indicators also nll_* [B],
            loss_t, loss_v, loss_m and loss_all
        """
        h_t = self.encode_textual(pair_ids, pair_segments)
        image_states, attention = self.image_encoder(patches)
        h_v = self.cross_encoder(hypothesis_ids, image_states)[:, 0]
        h_m = self.gate(h_t, h_v)

        outputs = {
            "h_t": h_t,
            "h_v": h_v,
            "h_m": h_m,
            "attention": attention,
            "logp_t": self.textual_head(h_t),
            "logp_v": self.visual_head(h_v),
            "logp_m": self.multimodal_head(h_m),
        }
        if labels is not None:
            if indicators is None:
                raise ValueError("indicators are required together with labels")
            logps = {key: outputs[f"logp_{key}"] for key in ("t", "v", "m")}
            outputs.update(gated_losses(logps, labels, indicators))
        return outputs

    def attention_profiles(self, grids: list[PatchGrid]) -> list[AttentionProfile]:
        """Summary-to-patch attention under the current weights"""
        if not grids:
            return []
        dtype = next(self.parameters()).dtype
        patches = torch.from_numpy(np.stack([patchify(g) for g in grids])).to(dtype)
        with torch.no_grad():
            _, attention = self.image_encoder(patches)
        return [AttentionProfile(scores=row.to(torch.float64).numpy()) for row in attention]

    def visual_parameter_names(self) -> list[str]:
        """Parameters that only the visual path reaches (image and cross encoders, visual head)"""
        prefixes = ("image_encoder.", "visual_head.")
        if self.text_encoder is not None:
            prefixes += ("cross_encoder.",)
        return [name for name, _ in self.named_parameters() if name.startswith(prefixes)]

    def textual_parameter_names(self) -> list[str]:
        prefixes = ("textual_head.",)
        if self.text_encoder is not None:
            prefixes += ("text_encoder.",)
        return [name for name, _ in self.named_parameters() if name.startswith(prefixes)]


def build_model(
    config: EncoderConfig,
    seed: int = 0,
    dtype: torch.dtype = torch.float64,
    head_activation: str | None = None,
    share_text_encoder: bool | None = None,
) -> EntailmentModel:
    """
    Fresh model with weights drawn from torch's generator seeded with seed

    Ablation switches default to the config's head_activation and
    share_text_encoder entries when present.
    """
    activation = head_activation or config.get("head_activation", "softmax")
    shared = share_text_encoder if share_text_encoder is not None else config.get("share_text_encoder", False)
    torch.manual_seed(seed)
    with default_dtype(dtype):
        model = EntailmentModel(config, activation, shared)
    logger.info(
        f"Built entailment model: {sum(p.numel() for p in model.parameters())} parameters, "
        f"head={activation}, shared_text={shared}, dtype={dtype}"
    )
    return model
