"""
Batch assembly

Turns a list of examples into the keyword tensors EntailmentModel.forward
consumes. Token rows are padded only to the longest real sequence in the
batch, so a batch of one matches encode_text / cross_encode exactly.
"""

import numpy as np
import torch

from .examples import validate_example
from ..encoders.patches import patchify
from ..encoders.tokenizer import tokenize, pack_pair, segment_ids, real_length
from ..models.config import EncoderConfig
from ..models.entailment import EntailmentExample
from ..models.errors import ExampleValidationError
from ..models.inputs import TokenSequence


def collate(
    examples: list[EntailmentExample],
    config: EncoderConfig,
    dtype: torch.dtype = torch.float64,
    with_labels: bool = True,
) -> dict[str, torch.Tensor]:
    """
    Returns:
        pair_ids, pair_segments [B, Lp]; hypothesis_ids [B, Lh];
        patches [B, P, patch_dim]; labels [B] and indicators [B, 3] when
        with_labels is set
    """
    if not examples:
        raise ExampleValidationError("Cannot collate an empty batch")
    for ex in examples:
        validate_example(ex, config)

    vocab, max_length = config["vocab_size"], config["max_length"]
    pairs, hypotheses = [], []
    for ex in examples:
        hypothesis = tokenize(ex["hypothesis"], vocab, max_length)
        pairs.append(pack_pair(tokenize(ex["premise_text"], vocab, max_length), hypothesis))
        hypotheses.append(hypothesis)

    pair_ids = _stack_trimmed(pairs)
    pair_segments = _stack_trimmed(pairs, segments=True)
    patches = np.stack([patchify(ex["premise_image"]) for ex in examples])

    batch = {
        "pair_ids": pair_ids,
        "pair_segments": pair_segments,
        "hypothesis_ids": _stack_trimmed(hypotheses),
        "patches": torch.from_numpy(np.ascontiguousarray(patches)).to(dtype),
    }
    if with_labels:
        batch["labels"] = torch.tensor([ex["label"] for ex in examples], dtype=torch.long)
        batch["indicators"] = torch.tensor([list(ex["indicators"]) for ex in examples], dtype=dtype)
    return batch


def _stack_trimmed(sequences: list[TokenSequence], segments: bool = False) -> torch.Tensor:
    length = max(1, max(real_length(seq["tokens"]) for seq in sequences))
    rows = []
    for seq in sequences:
        if segments:
            rows.append(segment_ids(seq)[:length])
        else:
            rows.append(seq["tokens"][:length])
    return torch.tensor(rows, dtype=torch.long)

