"""
Cross-modal encoder

Hypothesis text layers interleaved with cross-attention onto image states;
the CLS-position output is the visual-entailment hidden state h^v.
"""

import torch
from torch import nn
from torch.func import functional_call

from .layers import CrossModalBlock
from .text import TextEmbeddings, sequence_tensors
from ..diffcore.params import ParamSet
from ..models.config import EncoderConfig
from ..models.inputs import TokenSequence, PAD_ID


class CrossEncoder(nn.Module):
    def __init__(self, config: EncoderConfig):
        super().__init__()
        self.embeddings = TextEmbeddings(config)
        self.blocks = nn.ModuleList([
            CrossModalBlock(config["hidden_dim"], config["num_heads"], config["ffn_dim"])
            for _ in range(config["cross_layers"])
        ])

    def forward(
        self,
        ids: torch.Tensor,
        image_states: torch.Tensor | None,
        segments: torch.Tensor | None = None,
    ) -> torch.Tensor:
        """
        Args:
            ids: [B, L] hypothesis token ids (no premise text)
            image_states: [B, N, D], or None for a text-only pass
            segments: [B, L] segment ids or None

        Returns:
            [B, L, D] final-layer text states
        """
        text_mask = ids != PAD_ID
        x = self.embeddings(ids, segments)
        for block in self.blocks:
            x = block(x, image_states, text_mask)
        return x


def cross_encode(
    patch_states: torch.Tensor,
    hypothesis_seq: TokenSequence,
    encoder: CrossEncoder,
    params: ParamSet | None = None,
) -> torch.Tensor:
    """
    h^v for one (image states, hypothesis) pair

    Args:
        patch_states: [N, D] image-encoder states
        hypothesis_seq: The hypothesis tokenized alone

    Returns:
        [D] CLS-position output
    """
    ids, _ = sequence_tensors(hypothesis_seq)
    image = patch_states.unsqueeze(0)
    with torch.no_grad():
        if params is None:
            states = encoder(ids, image)
        else:
            states = functional_call(encoder, params.tensors, args=(ids, image))
    return states[0, 0]
