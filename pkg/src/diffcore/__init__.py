"""Differentiable computation substrate"""

from .params import ParamSet
from .graph import forward_eval, backward_grad, finite_diff_check
from .checkpoint import save_checkpoint, load_checkpoint, MAGIC
from .runtime import seed_everything, dtype_for, default_dtype
from .primitives import primitive_cases, CheckCase

__all__ = [
    "ParamSet",
    "forward_eval",
    "backward_grad",
    "finite_diff_check",
    "save_checkpoint",
    "load_checkpoint",
    "MAGIC",
    "seed_everything",
    "dtype_for",
    "default_dtype",
    "primitive_cases",
    "CheckCase",
]
