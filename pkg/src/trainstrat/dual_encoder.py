"""
Reference dual-encoder retrieval model

Image tower: per-patch MLP, mean over patches, projection.
Text tower: token embeddings, masked mean over real tokens, projection.
Both outputs are L2-normalized; similarities are scaled by a learnable
temperature.
"""

import math
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..diffcore import ops
from ..diffcore.checkpoint import save_checkpoint, load_checkpoint
from ..diffcore.params import ParamSet
from ..diffcore.runtime import default_dtype
from ..encoders.layers import Affine
from ..encoders.patches import patchify
from ..encoders.tokenizer import tokenize, real_length
from ..models.corpus import RetrievalCorpus
from ..models.errors import CheckpointFormatError
from ..models.inputs import SPECIAL_IDS

DUAL_ENCODER_KEYS = (
    "image_size", "channels", "patch_size", "vocab_size", "max_length",
    "hidden_dim", "embed_dim", "temperature",
)


class DualEncoder(nn.Module):
    def __init__(self, config: dict):
        super().__init__()
        self.config = {key: config[key] for key in DUAL_ENCODER_KEYS}
        hidden, embed = config["hidden_dim"], config["embed_dim"]
        patch_dim = config["patch_size"] ** 2 * config["channels"]

        self.patch_mlp = Affine(patch_dim, hidden)
        self.image_proj = Affine(hidden, embed)
        self.token_embed = nn.Parameter(torch.randn(config["vocab_size"], hidden) * 0.1)
        self.text_proj = Affine(hidden, embed)
        self.log_temperature = nn.Parameter(torch.tensor(math.log(config["temperature"])))

    def encode_images(self, patches: torch.Tensor) -> torch.Tensor:
        """[B, P, patch_dim] -> [B, E] unit rows"""
        pooled = ops.masked_mean(ops.relu(self.patch_mlp(patches)))
        return ops.l2_normalize(self.image_proj(pooled))

    def encode_texts(self, ids: torch.Tensor) -> torch.Tensor:
        """[B, L] -> [B, E] unit rows; CLS/SEP/PAD are left out of the mean"""
        pooled = ops.masked_mean(ops.embedding(ids, self.token_embed), ids >= SPECIAL_IDS)
        return ops.l2_normalize(self.text_proj(pooled))

    def temperature(self) -> torch.Tensor:
        return self.log_temperature.exp()

    def forward(self, patches: torch.Tensor, ids: torch.Tensor, usable: torch.Tensor) -> dict[str, torch.Tensor]:
        """
        Symmetric in-batch contrastive loss

        Args:
            patches: [B, P, patch_dim], row i is the image of pair i
            ids: [B, L], row j is the caption of pair j
            usable: [B, B] boolean; False hides entry (i, j) from both
                softmax denominators (the diagonal must stay True)

        Returns:
            loss = mean image-to-text CE + mean text-to-image CE, plus the
            logits and both embedding matrices
        """
        images = self.encode_images(patches)
        texts = self.encode_texts(ids)
        logits = torch.matmul(images, texts.transpose(0, 1)) / self.temperature()
        targets = torch.arange(logits.shape[0])
        i2t = -ops.log_softmax(logits, dim=-1, mask=usable).gather(-1, targets.unsqueeze(-1)).squeeze(-1)
        t2i = -ops.log_softmax(logits.transpose(0, 1), dim=-1, mask=usable.transpose(0, 1))
        t2i = t2i.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
        return {
            "loss": ops.reduce_mean(i2t) + ops.reduce_mean(t2i),
            "logits": logits,
            "image_embeddings": images,
            "text_embeddings": texts,
        }


def build_dual_encoder(config: dict, seed: int = 0, dtype: torch.dtype = torch.float32) -> DualEncoder:
    torch.manual_seed(seed)
    with default_dtype(dtype):
        return DualEncoder(config)


def image_tensor(corpus: RetrievalCorpus, image_ids: list[str], patch_size: int, dtype: torch.dtype) -> torch.Tensor:
    """[B, P, patch_dim] patches of the listed images"""
    grids = [{"image": corpus["images"][i], "patch_size": patch_size} for i in image_ids]
    return torch.from_numpy(np.stack([patchify(g) for g in grids])).to(dtype)


def caption_tensor(corpus: RetrievalCorpus, caption_ids: list[str], vocab_size: int, max_length: int) -> torch.Tensor:
    """[B, L] token ids, trimmed to the longest caption"""
    sequences = [tokenize(corpus["captions"][c], vocab_size, max_length)["tokens"] for c in caption_ids]
    length = max(1, max(real_length(s) for s in sequences))
    return torch.tensor([s[:length] for s in sequences], dtype=torch.long)


def save_dual_encoder(path: str | Path, model: DualEncoder, seed: int = 0) -> None:
    meta = {"kind": "dual_encoder", "config": model.config}
    save_checkpoint(path, ParamSet.from_module(model, rng_seed=seed), meta)


def load_dual_encoder(path: str | Path, dtype: torch.dtype = torch.float32) -> DualEncoder:
    params, meta = load_checkpoint(path, dtype=dtype)
    if meta.get("kind") != "dual_encoder":
        raise CheckpointFormatError(f"{path} is not a dual-encoder checkpoint (kind={meta.get('kind')})")
    model = build_dual_encoder(meta["config"], params.rng_seed, dtype)
    params.load_into(model)
    return model

