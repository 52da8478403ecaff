"""
Batch planning

Gold pairs are shuffled into regular batches. After each regular batch
comes one weak batch at lr_scale alpha, filled first with weak edges of
the regular batch's images, then topped up from a cycling pool of the
remaining weak edges. Top-ups never consume a later batch's incident
edges, and the pool wraps around when it runs out, so a weak batch is
omitted only when the graph has no weak edges at all. A weak batch is
truncated to the number of distinct weak edges when that is below
batch_size.
"""

import logging
import random

from .graph import EntailmentGraph
from ..models.corpus import RetrievalCorpus
from ..models.errors import ConfigError, PlanValidationError
from ..models.retrieval import BatchPlan, Pair, PlannedBatch

logger = logging.getLogger(__name__)


def plan_batches(
    corpus: RetrievalCorpus,
    graph: EntailmentGraph,
    batch_size: int,
    alpha: float,
    seed: int,
    base_lr: float = 1.0,
    weak_batches: bool = True,
) -> BatchPlan:
    if batch_size < 2:
        raise ConfigError(f"batch_size must be >= 2, got {batch_size}")
    if not 0.0 <= alpha <= 1.0:
        raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")

    rng = random.Random(seed)
    gold_pairs: list[Pair] = sorted((img, cap) for img, caps in corpus["gold"].items() for cap in caps)
    rng.shuffle(gold_pairs)

    pool: list[Pair] = sorted(graph.entailed) if weak_batches else []
    rng.shuffle(pool)
    incident: dict[str, list[Pair]] = {}
    for pair in pool:
        incident.setdefault(pair[0], []).append(pair)
    target = min(batch_size, len(pool))
    cursor = 0

    batches: list[PlannedBatch] = []
    for start in range(0, len(gold_pairs), batch_size):
        regular = gold_pairs[start:start + batch_size]
        batches.append(PlannedBatch(kind="regular", pairs=regular, lr_scale=1.0))
        if not pool:
            continue

        chosen: dict[Pair, None] = {}
        for image in dict.fromkeys(img for img, _ in regular):
            for pair in incident.get(image, []):
                if len(chosen) == target:
                    break
                chosen[pair] = None
        # top-up walks at most one full cycle of the pool
        while len(chosen) < target:
            chosen.setdefault(pool[cursor], None)
            cursor = (cursor + 1) % len(pool)
        batches.append(PlannedBatch(kind="weak", pairs=list(chosen), lr_scale=alpha))

    weak_count = sum(1 for b in batches if b["kind"] == "weak")
    logger.debug(f"Planned {len(batches) - weak_count} regular and {weak_count} weak batches")
    return BatchPlan(batches=batches, base_lr=base_lr, alpha=alpha)


def validate_plan(plan: BatchPlan, graph: EntailmentGraph) -> None:
    """
    Raises:
        PlanValidationError: On any violation of the alternation, content
            or lr_scale rules
    """
    previous = None
    for index, batch in enumerate(plan["batches"]):
        if not batch["pairs"]:
            raise PlanValidationError(f"Batch {index} is empty")
        if batch["kind"] == "regular":
            if batch["lr_scale"] != 1.0:
                raise PlanValidationError(f"Regular batch {index} has lr_scale {batch['lr_scale']}")
            stray = [p for p in batch["pairs"] if p not in graph.gold]
            if stray:
                raise PlanValidationError(f"Regular batch {index} holds non-gold pairs {stray[:3]}")
        elif batch["kind"] == "weak":
            if previous != "regular":
                raise PlanValidationError(f"Weak batch {index} does not follow a regular batch")
            if batch["lr_scale"] != plan["alpha"]:
                raise PlanValidationError(
                    f"Weak batch {index} has lr_scale {batch['lr_scale']}, expected alpha={plan['alpha']}"
                )
            stray = [p for p in batch["pairs"] if p not in graph.entailed]
            if stray:
                raise PlanValidationError(f"Weak batch {index} holds non-weak pairs {stray[:3]}")
        else:
            raise PlanValidationError(f"Batch {index} has unknown kind {batch['kind']!r}")
        previous = batch["kind"]
