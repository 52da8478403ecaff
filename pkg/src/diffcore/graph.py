"""
Graph evaluation, reverse-mode gradients and finite-difference checks

A computation graph is any nn.Module whose forward takes named tensors as
keyword arguments and returns a dict of named output tensors. It is always
evaluated against an explicit ParamSet.
"""

import logging
from typing import Iterable

import torch
from torch import nn
from torch.func import functional_call

from .params import ParamSet
from ..models.errors import EntailKitValidationError, PrecisionError, ShapeMismatchError

logger = logging.getLogger(__name__)

INPUT_PREFIX = "input:"


def forward_eval(
    graph: nn.Module,
    inputs: dict[str, torch.Tensor],
    params: ParamSet,
) -> dict[str, torch.Tensor]:
    """
    Evaluate a graph without recording gradients

    Raises:
        EntailKitValidationError: If any output contains NaN or Inf
    """
    with torch.no_grad():
        outputs = functional_call(graph, params.tensors, args=(), kwargs=inputs)
    _check_finite(outputs, graph)
    return outputs


def backward_grad(
    graph: nn.Module,
    inputs: dict[str, torch.Tensor],
    params: ParamSet,
    loss_name: str = "loss",
    scale: float = 1.0,
    wrt_inputs: Iterable[str] = (),
) -> dict[str, torch.Tensor]:
    """
    Gradient of a scalar output with respect to every parameter

    Parameters that do not influence the loss receive exact zeros.

    Args:
        graph: Module returning a dict of outputs
        inputs: Keyword inputs for the graph
        params: Parameter values to differentiate at
        loss_name: Name of the scalar output
        scale: Upstream gradient (d total / d loss)
        wrt_inputs: Input names whose gradients are also returned,
            keyed as "input:<name>"

    Returns:
        Mapping from parameter name (and "input:<name>") to gradient

    Raises:
        ShapeMismatchError: If the named output is not a scalar
        KeyError: If the graph has no output called loss_name
    """
    leaves = {name: t.detach().clone().requires_grad_(True) for name, t in params.tensors.items()}
    input_names = list(wrt_inputs)
    call_inputs = dict(inputs)
    for name in input_names:
        call_inputs[name] = inputs[name].detach().clone().requires_grad_(True)

    with torch.enable_grad():
        outputs = functional_call(graph, leaves, args=(), kwargs=call_inputs)
        if loss_name not in outputs:
            raise KeyError(f"Graph output '{loss_name}' not found. Available outputs: {', '.join(outputs)}")
        loss = outputs[loss_name]
        if loss.numel() != 1:
            raise ShapeMismatchError("backward_grad", {loss_name: loss.shape})

        targets = list(leaves.values()) + [call_inputs[name] for name in input_names]
        grads = torch.autograd.grad(
            loss.reshape(()),
            targets,
            grad_outputs=torch.tensor(scale, dtype=loss.dtype),
            allow_unused=True,
        )

    result: dict[str, torch.Tensor] = {}
    for (name, leaf), grad in zip(leaves.items(), grads[: len(leaves)]):
        result[name] = torch.zeros_like(leaf) if grad is None else grad.detach()
    for name, grad in zip(input_names, grads[len(leaves):]):
        result[INPUT_PREFIX + name] = torch.zeros_like(inputs[name]) if grad is None else grad.detach()
    return result


def finite_diff_check(
    graph: nn.Module,
    inputs: dict[str, torch.Tensor],
    params: ParamSet,
    eps: float = 1e-6,
    loss_name: str = "loss",
    wrt_inputs: Iterable[str] = (),
    max_per_tensor: int | None = None,
    seed: int = 0,
    abs_floor: float = 1e-3,
) -> float:
    """
    Worst relative error between backward_grad and central differences

    The denominator is max(|analytic|, |numeric|, abs_floor) so components
    far below float64 round-off of the loss are judged on an absolute scale.
    Never raises on a large error; the caller decides the tolerance.

    Args:
        eps: Perturbation, in [1e-7, 1e-4]
        max_per_tensor: Check at most this many components of each tensor,
            chosen with a seeded generator (None checks every component)

    Raises:
        PrecisionError: If parameters or checked inputs are not float64
    """
    if not 1e-7 <= eps <= 1e-4:
        raise EntailKitValidationError(f"eps must lie in [1e-7, 1e-4], got {eps}")
    input_names = list(wrt_inputs)
    for name, tensor in list(params.tensors.items()) + [(n, inputs[n]) for n in input_names]:
        if tensor.dtype != torch.float64:
            raise PrecisionError(f"finite_diff_check needs float64; '{name}' is {tensor.dtype}")

    analytic = backward_grad(graph, inputs, params, loss_name=loss_name, wrt_inputs=input_names)
    generator = torch.Generator().manual_seed(seed)

    def loss_at(p: ParamSet, x: dict[str, torch.Tensor]) -> float:
        return float(forward_eval(graph, x, p)[loss_name])

    worst = 0.0
    targets = [(name, "param") for name in params.tensors] + [(name, "input") for name in input_names]
    for name, kind in targets:
        base = params.tensors[name] if kind == "param" else inputs[name]
        grad = analytic[name if kind == "param" else INPUT_PREFIX + name].reshape(-1)
        indices = _pick_indices(base.numel(), max_per_tensor, generator)

        for index in indices:
            numeric = 0.0
            for sign in (1.0, -1.0):
                perturbed = base.detach().clone().reshape(-1)
                perturbed[index] += sign * eps
                perturbed = perturbed.reshape(base.shape)
                if kind == "param":
                    value = loss_at(params.replace(name, perturbed), inputs)
                else:
                    value = loss_at(params, {**inputs, name: perturbed})
                numeric += sign * value
            numeric /= 2.0 * eps

            exact = float(grad[index])
            error = abs(exact - numeric) / max(abs(exact), abs(numeric), abs_floor)
            if error > worst:
                worst = error

    logger.info(f"Finite-difference check: {len(targets)} tensors, max relative error {worst:.3e}")
    return worst


def _pick_indices(numel: int, limit: int | None, generator: torch.Generator) -> list[int]:
    if limit is None or numel <= limit:
        return list(range(numel))
    return sorted(torch.randperm(numel, generator=generator)[:limit].tolist())


def _check_finite(outputs: dict[str, torch.Tensor], graph: nn.Module) -> None:
    for name, value in outputs.items():
        if torch.is_tensor(value) and value.is_floating_point() and not torch.isfinite(value).all():
            raise EntailKitValidationError(
                f"Non-finite values in output '{name}' of {type(graph).__name__}"
            )
