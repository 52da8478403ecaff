"""
Retrieval Training Records
"""

from typing import TypedDict, Literal

BatchKind = Literal["regular", "weak"]
Direction = Literal["TEXT_RETRIEVAL", "IMAGE_RETRIEVAL"]

Pair = tuple[str, str]  # (image_id, caption_id)


class PlannedBatch(TypedDict):
    kind: BatchKind
    pairs: list[Pair]
    lr_scale: float  # 1.0 for regular batches, alpha for weak batches


class BatchPlan(TypedDict):
    """
    One epoch of batches

    Every weak batch immediately follows a regular batch; regular batches
    hold gold pairs only, weak batches weak pairs only.
    """
    batches: list[PlannedBatch]
    base_lr: float
    alpha: float


class StepRecord(TypedDict):
    step: int
    batch_kind: BatchKind
    lr_effective: float
    loss: float
    masked_negatives: int


class RankedRun(TypedDict):
    """
    Per query, item ids by descending score

    TEXT_RETRIEVAL queries are image ids ranking caption ids;
    IMAGE_RETRIEVAL queries are caption ids ranking image ids.
    """
    direction: Direction
    rankings: dict[str, list[str]]
