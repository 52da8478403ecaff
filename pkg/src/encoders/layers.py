"""
Transformer building blocks

Every block computes through the diffcore primitives. Attention modules
return their weights alongside the output so callers can read saliency
without state on the module.
"""

import torch
from torch import nn

from ..diffcore import ops


class Affine(nn.Module):
    """Learnable affine map in_features -> out_features"""

    def __init__(self, in_features: int, out_features: int, bias: bool = True):
        super().__init__()
        self.weight = nn.Parameter(torch.randn(out_features, in_features) * in_features**-0.5)
        self.bias = nn.Parameter(torch.zeros(out_features)) if bias else None

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return ops.affine(x, self.weight, self.bias)


class LayerNorm(nn.Module):
    def __init__(self, width: int, eps: float = 1e-5):
        super().__init__()
        self.weight = nn.Parameter(torch.ones(width))
        self.bias = nn.Parameter(torch.zeros(width))
        self.eps = eps

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return ops.layer_norm(x, self.weight, self.bias, self.eps)


class MultiHeadAttention(nn.Module):
    """
    Multi-head scaled dot-product attention

    Queries come from x, keys/values from context (self-attention when
    context is x).
    """

    def __init__(self, hidden_dim: int, num_heads: int):
        super().__init__()
        if hidden_dim % num_heads:
            raise ValueError(f"hidden_dim {hidden_dim} not divisible by num_heads {num_heads}")
        self.num_heads = num_heads
        self.head_dim = hidden_dim // num_heads
        self.query = Affine(hidden_dim, hidden_dim)
        self.key = Affine(hidden_dim, hidden_dim)
        self.value = Affine(hidden_dim, hidden_dim)
        self.output = Affine(hidden_dim, hidden_dim)

    def _split(self, x: torch.Tensor) -> torch.Tensor:
        batch, length, _ = x.shape
        return x.reshape(batch, length, self.num_heads, self.head_dim).transpose(1, 2)

    def forward(
        self,
        x: torch.Tensor,
        context: torch.Tensor,
        key_mask: torch.Tensor | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """
        Args:
            x: [B, Lq, D]
            context: [B, Lk, D]
            key_mask: [B, Lk] boolean, False hides a key

        Returns:
            (output [B, Lq, D], weights [B, H, Lq, Lk])
        """
        mask = key_mask[:, None, None, :] if key_mask is not None else None
        out, weights = ops.attention(
            self._split(self.query(x)),
            self._split(self.key(context)),
            self._split(self.value(context)),
            key_mask=mask,
        )
        batch, _, length, _ = out.shape
        merged = out.transpose(1, 2).reshape(batch, length, self.num_heads * self.head_dim)
        return self.output(merged), weights


class FeedForward(nn.Module):
    def __init__(self, hidden_dim: int, ffn_dim: int):
        super().__init__()
        self.up = Affine(hidden_dim, ffn_dim)
        self.down = Affine(ffn_dim, hidden_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.down(ops.relu(self.up(x)))


class TransformerBlock(nn.Module):
    """Post-norm self-attention block: x = LN(x + attn(x)); x = LN(x + ffn(x))"""

    def __init__(self, hidden_dim: int, num_heads: int, ffn_dim: int):
        super().__init__()
        self.attention = MultiHeadAttention(hidden_dim, num_heads)
        self.norm1 = LayerNorm(hidden_dim)
        self.ffn = FeedForward(hidden_dim, ffn_dim)
        self.norm2 = LayerNorm(hidden_dim)

    def forward(
        self, x: torch.Tensor, key_mask: torch.Tensor | None = None
    ) -> tuple[torch.Tensor, torch.Tensor]:
        """Returns (states, attention weights [B, H, L, L])"""
        attended, weights = self.attention(x, x, key_mask)
        x = self.norm1(x + attended)
        return self.norm2(x + self.ffn(x)), weights


class CrossModalBlock(nn.Module):
    """Text self-attention, then cross-attention onto image states, then FFN"""

    def __init__(self, hidden_dim: int, num_heads: int, ffn_dim: int):
        super().__init__()
        self.self_attention = MultiHeadAttention(hidden_dim, num_heads)
        self.norm1 = LayerNorm(hidden_dim)
        self.cross_attention = MultiHeadAttention(hidden_dim, num_heads)
        self.norm2 = LayerNorm(hidden_dim)
        self.ffn = FeedForward(hidden_dim, ffn_dim)
        self.norm3 = LayerNorm(hidden_dim)

    def forward(
        self,
        text: torch.Tensor,
        image: torch.Tensor | None,
        text_mask: torch.Tensor | None = None,
    ) -> torch.Tensor:
        attended, _ = self.self_attention(text, text, text_mask)
        text = self.norm1(text + attended)
        # No image states: text-only pass through the same weights
        if image is not None:
            attended, _ = self.cross_attention(text, image)
            text = self.norm2(text + attended)
        return self.norm3(text + self.ffn(text))
