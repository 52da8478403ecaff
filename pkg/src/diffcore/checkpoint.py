"""
Parameter checkpoint files

Layout:
    b"ENTAILKIT-CKPT-1\\n"
    uint64 little-endian header length
    UTF-8 JSON header {"rng_seed", "params": [{"name", "shape"}], "meta"}
    float64 little-endian payloads, concatenated in header order

Names are written sorted and JSON keys sorted, so identical parameters
produce byte-identical files.
"""

import json
import struct
import logging
from pathlib import Path
from typing import Any

import numpy as np
import torch

from .params import ParamSet
from ..models.errors import CheckpointFormatError

logger = logging.getLogger(__name__)

MAGIC = b"ENTAILKIT-CKPT-1\n"
_LENGTH = struct.Struct("<Q")


def save_checkpoint(path: str | Path, params: ParamSet, meta: dict[str, Any] | None = None) -> Path:
    """
    Write a ParamSet (and optional JSON-serializable metadata)

    Returns:
        The path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    names = sorted(params.tensors)
    header = {
        "rng_seed": params.rng_seed,
        "params": [{"name": name, "shape": list(params.tensors[name].shape)} for name in names],
        "meta": meta or {},
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_LENGTH.pack(len(header_bytes)))
        f.write(header_bytes)
        for name in names:
            array = params.tensors[name].detach().cpu().to(torch.float64).numpy()
            f.write(np.ascontiguousarray(array, dtype="<f8").tobytes())

    logger.info(f"Saved checkpoint with {len(names)} tensors to {path}")
    return path


def load_checkpoint(path: str | Path, dtype: torch.dtype = torch.float64) -> tuple[ParamSet, dict[str, Any]]:
    """
    Read a checkpoint written by save_checkpoint

    Returns:
        (parameters, metadata)

    Raises:
        CheckpointFormatError: Wrong magic header or truncated payload
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointFormatError(f"Checkpoint not found: {path}")

    blob = path.read_bytes()
    if not blob.startswith(MAGIC):
        raise CheckpointFormatError(f"{path} is not an entailkit checkpoint (bad magic header)")

    offset = len(MAGIC)
    if len(blob) < offset + _LENGTH.size:
        raise CheckpointFormatError(f"{path} is truncated before the header length")
    (header_length,) = _LENGTH.unpack_from(blob, offset)
    offset += _LENGTH.size

    try:
        header = json.loads(blob[offset:offset + header_length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointFormatError(f"{path} has an unreadable header: {e}")
    offset += header_length

    tensors: dict[str, torch.Tensor] = {}
    for entry in header["params"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        end = offset + 8 * count
        if end > len(blob):
            raise CheckpointFormatError(f"{path} is truncated inside tensor '{entry['name']}'")
        array = np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape)
        tensors[entry["name"]] = torch.from_numpy(array.copy()).to(dtype)
        offset = end

    if offset != len(blob):
        raise CheckpointFormatError(f"{path} has {len(blob) - offset} trailing bytes")

    return ParamSet(tensors, int(header["rng_seed"])), header.get("meta", {})
