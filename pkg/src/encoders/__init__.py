"""Text, image and cross-modal encoders"""

from .tokenizer import tokenize, pack_pair, segment_ids, content, word_ids, validate_sequence
from .patches import make_grid, black_grid, patchify, unpatchify, patch_count
from .text import TextEncoder, encode_text
from .image import ImageEncoder, encode_image, grid_tensor
from .cross import CrossEncoder, cross_encode

__all__ = [
    "tokenize",
    "pack_pair",
    "segment_ids",
    "content",
    "word_ids",
    "validate_sequence",
    "make_grid",
    "black_grid",
    "patchify",
    "unpatchify",
    "patch_count",
    "TextEncoder",
    "encode_text",
    "ImageEncoder",
    "encode_image",
    "grid_tensor",
    "CrossEncoder",
    "cross_encode",
]
