"""
Patch grids

Images are H x W x C arrays; patches are flattened row-major over the patch
grid, each patch itself flattened (row, column, channel).
"""

import numpy as np

from ..models.inputs import PatchGrid


def make_grid(image: np.ndarray, patch_size: int = 8) -> PatchGrid:
    """
    Wrap an image after checking its geometry

    Raises:
        ValueError: If the image is not H x W x C or H, W are not multiples
            of patch_size
    """
    if image.ndim != 3:
        raise ValueError(f"Image must be H x W x C, got shape {image.shape}")
    height, width, _ = image.shape
    if height % patch_size or width % patch_size:
        raise ValueError(f"Image {height}x{width} is not divisible by patch size {patch_size}")
    return PatchGrid(image=image, patch_size=patch_size)


def black_grid(image_size: int = 32, channels: int = 3, patch_size: int = 8) -> PatchGrid:
    """The placeholder premise image: every pixel exactly 0"""
    return make_grid(np.zeros((image_size, image_size, channels), dtype=np.float32), patch_size)


def patch_count(grid: PatchGrid) -> int:
    height, width, _ = grid["image"].shape
    return (height // grid["patch_size"]) * (width // grid["patch_size"])


def patchify(grid: PatchGrid) -> np.ndarray:
    """[num_patches, patch_size * patch_size * C]"""
    image, p = grid["image"], grid["patch_size"]
    height, width, channels = image.shape
    rows, cols = height // p, width // p
    return (
        image.reshape(rows, p, cols, p, channels)
        .transpose(0, 2, 1, 3, 4)
        .reshape(rows * cols, p * p * channels)
    )


def unpatchify(patches: np.ndarray, image_size: tuple[int, int], patch_size: int, channels: int) -> np.ndarray:
    """Exact inverse of patchify"""
    height, width = image_size
    rows, cols = height // patch_size, width // patch_size
    return (
        patches.reshape(rows, cols, patch_size, patch_size, channels)
        .transpose(0, 2, 1, 3, 4)
        .reshape(height, width, channels)
    )


def patch_slices(grid: PatchGrid, patch_id: int) -> tuple[slice, slice]:
    """Pixel rows/columns covered by one patch"""
    p = grid["patch_size"]
    cols = grid["image"].shape[1] // p
    row, col = divmod(patch_id, cols)
    return slice(row * p, (row + 1) * p), slice(col * p, (col + 1) * p)
