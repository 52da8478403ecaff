"""
Determinism and precision controls
"""

import random
import logging
from contextlib import contextmanager
from typing import Iterator, Literal

import numpy as np
import torch

logger = logging.getLogger(__name__)

PrecisionMode = Literal["test", "train"]

_DTYPES: dict[str, torch.dtype] = {
    "test": torch.float64,
    "train": torch.float32,
}


def dtype_for(mode: PrecisionMode) -> torch.dtype:
    """float64 in test mode, float32 in train mode"""
    return _DTYPES[mode]


def seed_everything(seed: int) -> torch.Generator:
    """
    Seed python, numpy and torch; return a dedicated torch generator

    Single-threaded execution is forced so repeated runs are bit-identical.
    """
    random.seed(seed)
    np.random.seed(seed % (2**32))
    torch.manual_seed(seed)
    torch.set_num_threads(1)
    torch.use_deterministic_algorithms(True, warn_only=True)
    return torch.Generator().manual_seed(seed)


@contextmanager
def default_dtype(dtype: torch.dtype) -> Iterator[None]:
    """Temporarily change torch's default floating dtype"""
    previous = torch.get_default_dtype()
    torch.set_default_dtype(dtype)
    try:
        yield
    finally:
        torch.set_default_dtype(previous)
