"""
Attention-guided image masking

Positive image-text examples are cloned with their most-attended patches
blacked out and relabeled as non-entailment.
"""

import logging
import math
from typing import Callable

import numpy as np

from ..encoders.patches import make_grid, patch_count, patch_slices
from ..models.config import ExperimentConfig
from ..models.entailment import EntailmentExample, MaskSpec
from ..models.errors import ConfigError
from ..models.inputs import AttentionProfile, PatchGrid

logger = logging.getLogger(__name__)

AttentionFn = Callable[[list[PatchGrid]], list[AttentionProfile]]

# Task forms whose positives are turned into masked negatives
MASKED_FORMS = ("IMAGE_TEXT",)


def mask_spec(config: ExperimentConfig) -> MaskSpec:
    return MaskSpec(ratio=config["mask_ratio"], max_images_per_batch=config["mask_max_images"])


def mask_count(num_patches: int, ratio: float) -> int:
    """max(1, floor(ratio * num_patches))"""
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"mask ratio must lie in (0, 1), got {ratio}")
    return max(1, math.floor(ratio * num_patches))


def top_attention_patches(attn: AttentionProfile, ratio: float) -> list[int]:
    """
    Ids of the k highest-scoring patches, ascending

    Ties are broken by lower patch index first.
    """
    scores = np.asarray(attn["scores"], dtype=np.float64)
    k = mask_count(len(scores), ratio)
    order = np.lexsort((np.arange(len(scores)), -scores))
    return sorted(int(i) for i in order[:k])


def mask_image(grid: PatchGrid, ids: list[int]) -> PatchGrid:
    """Copy of grid with the listed patches set to 0"""
    total = patch_count(grid)
    image = grid["image"].copy()
    for patch_id in ids:
        if not 0 <= patch_id < total:
            raise ValueError(f"Patch id {patch_id} outside [0, {total})")
        rows, cols = patch_slices(grid, patch_id)
        image[rows, cols, :] = 0
    return make_grid(image, grid["patch_size"])


def augment_batch(
    batch: list[EntailmentExample],
    spec: MaskSpec,
    attention_fn: AttentionFn,
) -> list[EntailmentExample]:
    """
    Batch followed by masked negatives of its first positives

    Up to spec["max_images_per_batch"] positive IMAGE_TEXT examples, in batch
    order, are cloned with masked images and label 0. Attention comes from
    attention_fn, normally the model being trained. The input examples are
    never modified.
    """
    positives = [ex for ex in batch if ex["label"] == 1 and ex["task_form"] in MASKED_FORMS]
    positives = positives[: spec["max_images_per_batch"]]
    if not positives:
        return list(batch)

    profiles = attention_fn([ex["premise_image"] for ex in positives])
    negatives: list[EntailmentExample] = []
    for ex, profile in zip(positives, profiles):
        ids = top_attention_patches(profile, spec["ratio"])
        negative = EntailmentExample(**ex)
        negative["premise_image"] = mask_image(ex["premise_image"], ids)
        negative["label"] = 0
        negatives.append(negative)

    logger.debug(f"Masked {len(negatives)} positives into negatives")
    return list(batch) + negatives
