"""
Differentiable primitives

Thin, shape-checked wrappers over torch so every model in the package is
built from the same small set of operations. Gradients come from torch
autograd; finite_diff_check in graph.py verifies them as a black box.
"""

import math

import torch
import torch.nn.functional as F

from ..models.errors import ShapeMismatchError


def affine(x: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor | None = None) -> torch.Tensor:
    """
    y = x W^T + b

    Args:
        x: [..., in_features]
        weight: [out_features, in_features]
        bias: [out_features] or None
    """
    if weight.dim() != 2 or x.shape[-1] != weight.shape[-1]:
        raise ShapeMismatchError("affine", {"x": x.shape, "W": weight.shape})
    if bias is not None and tuple(bias.shape) != (weight.shape[0],):
        raise ShapeMismatchError("affine", {"W": weight.shape, "b": bias.shape})
    return F.linear(x, weight, bias)


def softmax(x: torch.Tensor, dim: int = -1, mask: torch.Tensor | None = None) -> torch.Tensor:
    """
    Softmax along dim; positions where mask is False get probability 0

    A row must keep at least one unmasked position.
    """
    if mask is not None:
        try:
            x = x.masked_fill(~mask, float("-inf"))
        except RuntimeError:
            raise ShapeMismatchError("softmax", {"x": x.shape, "mask": mask.shape})
    return torch.softmax(x, dim=dim)


def log_softmax(x: torch.Tensor, dim: int = -1, mask: torch.Tensor | None = None) -> torch.Tensor:
    if mask is not None:
        try:
            x = x.masked_fill(~mask, float("-inf"))
        except RuntimeError:
            raise ShapeMismatchError("log_softmax", {"x": x.shape, "mask": mask.shape})
    return torch.log_softmax(x, dim=dim)


def sigmoid(x: torch.Tensor) -> torch.Tensor:
    return torch.sigmoid(x)


def relu(x: torch.Tensor) -> torch.Tensor:
    return torch.relu(x)


def layer_norm(
    x: torch.Tensor,
    weight: torch.Tensor,
    bias: torch.Tensor,
    eps: float = 1e-5,
) -> torch.Tensor:
    """Normalize the last dimension, then scale and shift"""
    if tuple(weight.shape) != tuple(x.shape[-1:]) or tuple(bias.shape) != tuple(x.shape[-1:]):
        raise ShapeMismatchError("layer_norm", {"x": x.shape, "gamma": weight.shape, "beta": bias.shape})
    return F.layer_norm(x, x.shape[-1:], weight, bias, eps)


def attention(
    q: torch.Tensor,
    k: torch.Tensor,
    v: torch.Tensor,
    key_mask: torch.Tensor | None = None,
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Scaled dot-product attention

    Args:
        q: [..., Lq, d]
        k: [..., Lk, d]
        v: [..., Lk, dv]
        key_mask: boolean, broadcastable to [..., Lq, Lk]; False hides a key

    Returns:
        (output [..., Lq, dv], weights [..., Lq, Lk])
    """
    if q.shape[-1] != k.shape[-1] or k.shape[-2] != v.shape[-2]:
        raise ShapeMismatchError("attention", {"q": q.shape, "k": k.shape, "v": v.shape})
    if key_mask is not None and key_mask.shape[-1] != k.shape[-2]:
        raise ShapeMismatchError("attention", {"k": k.shape, "key_mask": key_mask.shape})

    scores = torch.matmul(q, k.transpose(-2, -1)) / math.sqrt(q.shape[-1])
    weights = softmax(scores, dim=-1, mask=key_mask)
    return torch.matmul(weights, v), weights


def embedding(ids: torch.Tensor, table: torch.Tensor) -> torch.Tensor:
    """Row lookup; ids must index rows of table"""
    if ids.numel() and (int(ids.max()) >= table.shape[0] or int(ids.min()) < 0):
        raise ShapeMismatchError("embedding", {"ids(max)": (int(ids.max()),), "table": table.shape})
    return F.embedding(ids, table)


def concat(tensors: list[torch.Tensor], dim: int = -1) -> torch.Tensor:
    try:
        return torch.cat(tensors, dim=dim)
    except RuntimeError:
        raise ShapeMismatchError("concat", {f"t{i}": t.shape for i, t in enumerate(tensors)})


def masked_mean(x: torch.Tensor, mask: torch.Tensor | None = None, dim: int = -2) -> torch.Tensor:
    """Mean over dim, counting only positions where mask is True"""
    if mask is None:
        return x.mean(dim=dim)
    if mask.shape != x.shape[:-1]:
        raise ShapeMismatchError("masked_mean", {"x": x.shape, "mask": mask.shape})
    weights = mask.to(x.dtype).unsqueeze(-1)
    return (x * weights).sum(dim=dim) / weights.sum(dim=dim).clamp_min(1.0)


def reduce_sum(x: torch.Tensor) -> torch.Tensor:
    return x.sum()


def reduce_mean(x: torch.Tensor) -> torch.Tensor:
    return x.mean()


def cross_entropy(logits: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """
    Per-example negative log-likelihood of softmax(logits)

    Args:
        logits: [B, C]
        target: [B] integer class ids

    Returns:
        [B] losses (no reduction)
    """
    if logits.dim() != 2 or target.shape != logits.shape[:1]:
        raise ShapeMismatchError("cross_entropy", {"logits": logits.shape, "target": target.shape})
    return -torch.log_softmax(logits, dim=-1).gather(-1, target.long().unsqueeze(-1)).squeeze(-1)


def l2_normalize(x: torch.Tensor, eps: float = 1e-12) -> torch.Tensor:
    """Unit-norm rows; an all-zero row stays zero"""
    return F.normalize(x, p=2.0, dim=-1, eps=eps)
