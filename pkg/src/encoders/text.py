"""
Text encoder

Token + position + segment embeddings followed by post-norm transformer
blocks. PAD positions are hidden from attention and trimmed before the
forward pass, so the CLS state does not depend on trailing padding.
"""

import torch
from torch import nn
from torch.func import functional_call

from .layers import LayerNorm, TransformerBlock
from .tokenizer import segment_ids, real_length
from ..diffcore import ops
from ..diffcore.params import ParamSet
from ..models.config import EncoderConfig
from ..models.inputs import TokenSequence, PAD_ID


class TextEmbeddings(nn.Module):
    def __init__(self, config: EncoderConfig):
        super().__init__()
        hidden = config["hidden_dim"]
        self.tokens = nn.Parameter(torch.randn(config["vocab_size"], hidden) * 0.1)
        self.positions = nn.Parameter(torch.randn(config["max_length"], hidden) * 0.1)
        self.segments = nn.Parameter(torch.randn(2, hidden) * 0.1)
        self.norm = LayerNorm(hidden)

    def forward(self, ids: torch.Tensor, segments: torch.Tensor | None = None) -> torch.Tensor:
        length = ids.shape[1]
        x = ops.embedding(ids, self.tokens) + self.positions[:length].unsqueeze(0)
        if segments is not None:
            x = x + ops.embedding(segments, self.segments)
        return self.norm(x)


class TextEncoder(nn.Module):
    """Encodes packed or standalone token ids; h is the CLS-position state"""

    def __init__(self, config: EncoderConfig, num_layers: int | None = None):
        super().__init__()
        self.embeddings = TextEmbeddings(config)
        self.blocks = nn.ModuleList([
            TransformerBlock(config["hidden_dim"], config["num_heads"], config["ffn_dim"])
            for _ in range(config["text_layers"] if num_layers is None else num_layers)
        ])

    def forward(self, ids: torch.Tensor, segments: torch.Tensor | None = None) -> torch.Tensor:
        """
        Args:
            ids: [B, L] token ids
            segments: [B, L] segment ids or None

        Returns:
            [B, L, D] final-layer states
        """
        key_mask = ids != PAD_ID
        x = self.embeddings(ids, segments)
        for block in self.blocks:
            x, _ = block(x, key_mask)
        return x


def sequence_tensors(seq: TokenSequence) -> tuple[torch.Tensor, torch.Tensor]:
    """[1, L'] ids and segments with trailing PAD trimmed"""
    length = max(1, real_length(seq["tokens"]))
    ids = torch.tensor([seq["tokens"][:length]], dtype=torch.long)
    segments = torch.tensor([segment_ids(seq)[:length]], dtype=torch.long)
    return ids, segments


def encode_text(
    seq: TokenSequence,
    encoder: TextEncoder,
    params: ParamSet | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Encode one token sequence

    Returns:
        (h [D] at the CLS position, all_states [L', D] for the real tokens)
    """
    ids, segments = sequence_tensors(seq)
    with torch.no_grad():
        if params is None:
            states = encoder(ids, segments)
        else:
            states = functional_call(encoder, params.tensors, args=(ids, segments))
    return states[0, 0], states[0]
