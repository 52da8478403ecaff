"""Attention-guided masking augment"""

from .masking import (
    top_attention_patches,
    mask_image,
    augment_batch,
    mask_count,
    mask_spec,
)

__all__ = [
    "top_attention_patches",
    "mask_image",
    "augment_batch",
    "mask_count",
    "mask_spec",
]
