"""
Gate unit

g^t = sigmoid(W^t h^t + b^t), g^v = sigmoid(W^v h^v + b^v),
h^m = g^t * h^t + g^v * h^v  (element-wise gates)
"""

import torch
from torch import nn
from torch.func import functional_call

from ..diffcore import ops
from ..diffcore.params import ParamSet
from ..encoders.layers import Affine


class GateUnit(nn.Module):
    def __init__(self, hidden_dim: int):
        super().__init__()
        self.text_gate = Affine(hidden_dim, hidden_dim)
        self.visual_gate = Affine(hidden_dim, hidden_dim)

    def gates(self, h_t: torch.Tensor, h_v: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        return ops.sigmoid(self.text_gate(h_t)), ops.sigmoid(self.visual_gate(h_v))

    def forward(self, h_t: torch.Tensor, h_v: torch.Tensor) -> torch.Tensor:
        g_t, g_v = self.gates(h_t, h_v)
        return g_t * h_t + g_v * h_v


def gate_fuse(
    h_t: torch.Tensor,
    h_v: torch.Tensor,
    gate: GateUnit,
    params: ParamSet | None = None,
) -> torch.Tensor:
    """h^m for hidden states of width hidden_dim (any leading batch shape)"""
    if h_t.shape != h_v.shape:
        raise ValueError(f"gate_fuse needs equal shapes, got {tuple(h_t.shape)} and {tuple(h_v.shape)}")
    with torch.no_grad():
        if params is None:
            return gate(h_t, h_v)
        return functional_call(gate, params.tensors, args=(h_t, h_v))
