"""
Primitive check graphs

One tiny graph per primitive, each reducing its output to a scalar through
a fixed random direction so every output component carries gradient.
"""

from typing import Callable, NamedTuple

import torch
from torch import nn

from . import ops
from .params import ParamSet


class CheckCase(NamedTuple):
    graph: nn.Module
    inputs: dict[str, torch.Tensor]
    params: ParamSet
    wrt_inputs: tuple[str, ...]


class _ProjectedLoss(nn.Module):
    """Base: subclasses compute `out`, the loss is sum(out * direction)"""

    def compute(self, **inputs: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def forward(self, direction: torch.Tensor, **inputs: torch.Tensor) -> dict[str, torch.Tensor]:
        out = self.compute(**inputs)
        return {"out": out, "loss": ops.reduce_sum(out * direction)}


class AffineGraph(_ProjectedLoss):
    def __init__(self, in_features: int, out_features: int):
        super().__init__()
        self.weight = nn.Parameter(torch.randn(out_features, in_features))
        self.bias = nn.Parameter(torch.randn(out_features))

    def compute(self, x):
        return ops.affine(x, self.weight, self.bias)


class LayerNormGraph(_ProjectedLoss):
    def __init__(self, width: int):
        super().__init__()
        self.weight = nn.Parameter(1.0 + 0.1 * torch.randn(width))
        self.bias = nn.Parameter(0.1 * torch.randn(width))

    def compute(self, x):
        return ops.layer_norm(x, self.weight, self.bias)


class AttentionGraph(_ProjectedLoss):
    def __init__(self, width: int):
        super().__init__()
        self.w_q = nn.Parameter(torch.randn(width, width) / width**0.5)
        self.w_k = nn.Parameter(torch.randn(width, width) / width**0.5)
        self.w_v = nn.Parameter(torch.randn(width, width) / width**0.5)

    def compute(self, x, key_mask):
        out, _ = ops.attention(
            ops.affine(x, self.w_q), ops.affine(x, self.w_k), ops.affine(x, self.w_v),
            key_mask=key_mask.unsqueeze(-2),
        )
        return out


class EmbeddingGraph(_ProjectedLoss):
    def __init__(self, rows: int, width: int):
        super().__init__()
        self.table = nn.Parameter(torch.randn(rows, width))

    def compute(self, ids):
        return ops.embedding(ids, self.table)


class ElementwiseGraph(_ProjectedLoss):
    """Parameter-free primitive; gradients are checked with respect to x"""

    def __init__(self, fn: Callable[[torch.Tensor], torch.Tensor]):
        super().__init__()
        self.fn = fn

    def compute(self, x):
        return self.fn(x)


class ConcatMeanGraph(_ProjectedLoss):
    def __init__(self, width: int):
        super().__init__()
        self.extra = nn.Parameter(torch.randn(3, width))

    def compute(self, x):
        joined = ops.concat([x, self.extra], dim=0)
        return ops.masked_mean(joined.unsqueeze(0), dim=-2)


class CrossEntropyGraph(nn.Module):
    def __init__(self, in_features: int, classes: int):
        super().__init__()
        self.weight = nn.Parameter(torch.randn(classes, in_features))

    def forward(self, x, target, direction=None):
        nll = ops.cross_entropy(ops.affine(x, self.weight), target)
        return {"out": nll, "loss": ops.reduce_sum(nll)}


def primitive_cases(seed: int, dtype: torch.dtype = torch.float64) -> dict[str, CheckCase]:
    """Build one CheckCase per primitive, deterministically from seed"""
    torch.manual_seed(seed)
    width, rows = 5, 4

    def away_from_zero(shape):
        x = torch.randn(*shape)
        return torch.sign(x) * (0.1 + x.abs())

    def case(graph: nn.Module, inputs: dict, wrt: tuple[str, ...] = ()) -> CheckCase:
        graph = graph.to(dtype)
        cast = {k: (v.to(dtype) if v.is_floating_point() else v) for k, v in inputs.items()}
        return CheckCase(graph, cast, ParamSet.from_module(graph, seed), wrt)

    x = torch.randn(rows, width)
    key_mask = torch.ones(rows, dtype=torch.bool)
    key_mask[-1] = False

    return {
        "affine": case(AffineGraph(width, 3), {"x": x, "direction": torch.randn(rows, 3)}, ("x",)),
        "softmax": case(
            ElementwiseGraph(lambda t: ops.softmax(t, dim=-1)),
            {"x": x, "direction": torch.randn(rows, width)}, ("x",),
        ),
        "sigmoid": case(ElementwiseGraph(ops.sigmoid), {"x": x, "direction": torch.randn(rows, width)}, ("x",)),
        "relu": case(
            ElementwiseGraph(ops.relu),
            {"x": away_from_zero((rows, width)), "direction": torch.randn(rows, width)}, ("x",),
        ),
        "layer_norm": case(LayerNormGraph(width), {"x": x, "direction": torch.randn(rows, width)}, ("x",)),
        "attention": case(
            AttentionGraph(width),
            {"x": x, "key_mask": key_mask, "direction": torch.randn(rows, width)}, ("x",),
        ),
        "embedding": case(
            EmbeddingGraph(7, width),
            {"ids": torch.tensor([0, 3, 3, 6]), "direction": torch.randn(4, width)},
        ),
        "concat_mean": case(ConcatMeanGraph(width), {"x": x, "direction": torch.randn(1, width)}, ("x",)),
        "cross_entropy": case(
            CrossEntropyGraph(width, 3),
            {"x": x, "target": torch.tensor([0, 2, 1, 2])}, ("x",),
        ),
    }
