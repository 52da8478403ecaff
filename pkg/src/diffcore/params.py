"""
Parameter sets

A ParamSet is a named, immutable-by-convention map of tensors plus the seed
that produced them. Models are evaluated against a ParamSet through
torch.func.functional_call, so perturbed copies can be evaluated without
touching the module.
"""

from dataclasses import dataclass, field
from typing import Callable, Iterator

import torch
from torch import nn


@dataclass
class ParamSet:
    """Named parameters plus the seed they were initialized from"""

    tensors: dict[str, torch.Tensor] = field(default_factory=dict)
    rng_seed: int = 0

    @classmethod
    def from_module(cls, module: nn.Module, rng_seed: int = 0) -> "ParamSet":
        return cls(
            tensors={name: p.detach().clone() for name, p in module.named_parameters()},
            rng_seed=rng_seed,
        )

    def __getitem__(self, name: str) -> torch.Tensor:
        return self.tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def __len__(self) -> int:
        return len(self.tensors)

    def names(self) -> list[str]:
        return list(self.tensors)

    def numel(self) -> int:
        return sum(t.numel() for t in self.tensors.values())

    def map(self, fn: Callable[[torch.Tensor], torch.Tensor]) -> "ParamSet":
        return ParamSet({name: fn(t) for name, t in self.tensors.items()}, self.rng_seed)

    def replace(self, name: str, tensor: torch.Tensor) -> "ParamSet":
        """Copy with one tensor swapped"""
        tensors = dict(self.tensors)
        tensors[name] = tensor
        return ParamSet(tensors, self.rng_seed)

    def to(self, dtype: torch.dtype) -> "ParamSet":
        return self.map(lambda t: t.to(dtype))

    def load_into(self, module: nn.Module) -> nn.Module:
        """Copy values into a module with matching parameter names"""
        own = dict(module.named_parameters())
        missing = sorted(set(own) - set(self.tensors))
        unexpected = sorted(set(self.tensors) - set(own))
        if missing or unexpected:
            raise KeyError(f"ParamSet does not match module: missing={missing}, unexpected={unexpected}")
        with torch.no_grad():
            for name, param in own.items():
                param.copy_(self.tensors[name])
        return module
