"""
Classification heads

An MLP with two ReLU hidden layers of width hidden_dim, then a two-way
output. The softmax head emits two logits; the sigmoid variant emits one
logit z and reads p(entail) = sigmoid(z).
"""

import torch
from torch import nn
from torch.func import functional_call

from ..diffcore import ops
from ..diffcore.params import ParamSet
from ..encoders.layers import Affine


class ClassifierHead(nn.Module):
    def __init__(self, hidden_dim: int, activation: str = "softmax"):
        super().__init__()
        if activation not in ("softmax", "sigmoid"):
            raise ValueError(f"Unsupported head activation: {activation}. Choose 'softmax' or 'sigmoid'")
        self.activation = activation
        self.hidden1 = Affine(hidden_dim, hidden_dim)
        self.hidden2 = Affine(hidden_dim, hidden_dim)
        self.out = Affine(hidden_dim, 2 if activation == "softmax" else 1)

    def forward(self, h: torch.Tensor) -> torch.Tensor:
        """
        Args:
            h: [B, D]

        Returns:
            [B, 2] log-probabilities (non-entail, entail)
        """
        logits = self.out(ops.relu(self.hidden2(ops.relu(self.hidden1(h)))))
        if self.activation == "softmax":
            return ops.log_softmax(logits, dim=-1)
        z = logits[:, 0]
        return torch.stack([nn.functional.logsigmoid(-z), nn.functional.logsigmoid(z)], dim=-1)


def classify_head(h: torch.Tensor, head: ClassifierHead, params: ParamSet | None = None) -> torch.Tensor:
    """
    Probability pair (p_non_entail, p_entail) for one hidden state [D]
    """
    with torch.no_grad():
        batch = h.unsqueeze(0)
        logp = head(batch) if params is None else functional_call(head, params.tensors, args=(batch,))
    return logp[0].exp()
