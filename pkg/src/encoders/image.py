"""
Patch image encoder

A shrunken vision transformer: linear patch embedding, a learned summary
token at position 0, learned positions, post-norm blocks.
"""

import numpy as np
import torch
from torch import nn
from torch.func import functional_call

from .layers import Affine, LayerNorm, TransformerBlock
from .patches import patchify
from ..diffcore.params import ParamSet
from ..models.config import EncoderConfig
from ..models.inputs import PatchGrid, AttentionProfile


class ImageEncoder(nn.Module):
    def __init__(self, config: EncoderConfig):
        super().__init__()
        hidden = config["hidden_dim"]
        patch_dim = config["patch_size"] ** 2 * config["channels"]
        self.num_patches = (config["image_size"] // config["patch_size"]) ** 2
        self.patch_embed = Affine(patch_dim, hidden)
        self.summary = nn.Parameter(torch.randn(hidden) * 0.1)
        self.positions = nn.Parameter(torch.randn(self.num_patches + 1, hidden) * 0.1)
        self.norm = LayerNorm(hidden)
        self.blocks = nn.ModuleList([
            TransformerBlock(hidden, config["num_heads"], config["ffn_dim"])
            for _ in range(config["image_layers"])
        ])

    def forward(self, patches: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """
        Args:
            patches: [B, P, patch_dim]

        Returns:
            (states [B, P + 1, D] with the summary at position 0,
             attention [B, P] from the summary to each patch, final layer,
             averaged over heads and renormalized over patches)
        """
        batch = patches.shape[0]
        summary = self.summary.expand(batch, 1, -1)
        x = torch.cat([summary, self.patch_embed(patches)], dim=1) + self.positions.unsqueeze(0)
        x = self.norm(x)
        for block in self.blocks:
            x, weights = block(x)

        # weights: final layer, [B, H, P+1, P+1]
        to_patches = weights[:, :, 0, 1:].mean(dim=1)
        attention = to_patches / to_patches.sum(dim=-1, keepdim=True)
        return x, attention


def grid_tensor(grid: PatchGrid, dtype: torch.dtype = torch.float64) -> torch.Tensor:
    """[1, P, patch_dim] patches of one grid"""
    return torch.from_numpy(np.ascontiguousarray(patchify(grid))).to(dtype).unsqueeze(0)


def encode_image(
    grid: PatchGrid,
    encoder: ImageEncoder,
    params: ParamSet | None = None,
) -> tuple[torch.Tensor, torch.Tensor, AttentionProfile]:
    """
    Encode one image

    Returns:
        (patch_states [P, D], summary_state [D], attention profile)
    """
    dtype = next(encoder.parameters()).dtype
    patches = grid_tensor(grid, dtype)
    with torch.no_grad():
        if params is None:
            states, attention = encoder(patches)
        else:
            states, attention = functional_call(encoder, params.tensors, args=(patches,))
    profile = AttentionProfile(scores=attention[0].to(torch.float64).numpy())
    return states[0, 1:], states[0, 0], profile
