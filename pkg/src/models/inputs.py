"""
Encoder Input Records

Token sequences, patch grids and attention profiles exchanged between the
encoders, the entailment heads and the masking augment.
"""

from typing import TypedDict

import numpy as np

CLS_ID = 0
SEP_ID = 1
PAD_ID = 2
SPECIAL_IDS = 3


class TokenSequence(TypedDict):
    """Fixed-length token ids: [CLS] ... ([SEP] ...) PAD*"""
    tokens: list[int]
    max_length: int


class PatchGrid(TypedDict):
    """An H x W x C image in [0, 1] with its patch size"""
    image: np.ndarray
    patch_size: int


class AttentionProfile(TypedDict):
    """Head-averaged final-layer attention from the summary position to each patch"""
    scores: np.ndarray  # [num_patches], non-negative, sums to 1
