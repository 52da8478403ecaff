"""
Entailment-enhanced retrieval training

Runs plan_batches once per epoch. negative_filtering masks gold and
entailed pairs out of the in-batch denominators; weak_batches interleaves
the weak-positive batches at alpha times the learning rate. Switching both
off gives the vanilla contrastive baseline.
"""

import logging
from pathlib import Path

import torch

from .contrastive import build_optimizer, build_scheduler, contrastive_step
from .dual_encoder import DualEncoder, build_dual_encoder
from .graph import EntailmentGraph
from .plan import plan_batches, validate_plan
from ..diffcore.runtime import seed_everything
from ..models.config import ExperimentConfig
from ..models.corpus import RetrievalCorpus
from ..models.retrieval import StepRecord
from ..utils.jsonl import write_jsonl

logger = logging.getLogger(__name__)


def train_retrieval(
    corpus: RetrievalCorpus,
    graph: EntailmentGraph,
    config: ExperimentConfig,
    seed: int | None = None,
    dtype: torch.dtype = torch.float32,
    log_path: str | Path | None = None,
) -> tuple[DualEncoder, list[StepRecord]]:
    """
    Returns:
        (trained dual encoder, one StepRecord per optimizer step)

    Raises:
        DivergenceError: If a step's loss is NaN or infinite
        PlanValidationError: If a generated plan breaks the batch rules
    """
    seed = config["seed"] if seed is None else seed
    seed_everything(seed)
    filtering = config["negative_filtering"]

    plans = []
    for epoch in range(config["epochs"]):
        plan = plan_batches(
            corpus,
            graph,
            config["batch_size"],
            config["alpha"],
            seed=seed * 1_000 + epoch,
            base_lr=config["lr"],
            weak_batches=config["weak_batches"],
        )
        validate_plan(plan, graph)
        plans.append(plan)

    model = build_dual_encoder(config, seed=seed, dtype=dtype)
    optimizer = build_optimizer(model, config["optimizer"], config["lr"], config["weight_decay"])
    scheduler = build_scheduler(
        optimizer, [b["lr_scale"] for p in plans for b in p["batches"]], config["lr_schedule"]
    )

    logger.info(
        f"Training retrieval model: {len(graph.gold)} gold / {len(graph.entailed)} weak edges, "
        f"negative_filtering={filtering}, weak_batches={config['weak_batches']}, alpha={config['alpha']}"
    )
    log: list[StepRecord] = []
    for epoch, plan in enumerate(plans):
        for batch in plan["batches"]:
            lr = scheduler.get_last_lr()[0]
            result = contrastive_step(model, optimizer, corpus, batch["pairs"], graph if filtering else None)
            scheduler.step()
            log.append(StepRecord(
                step=len(log),
                batch_kind=batch["kind"],
                lr_effective=lr,
                loss=result.loss,
                masked_negatives=result.masked_negatives,
            ))
        epoch_losses = [r["loss"] for r in log[-len(plan["batches"]):]] if plan["batches"] else [0.0]
        logger.info(f"Epoch {epoch}: {len(plan['batches'])} steps, mean loss {sum(epoch_losses) / len(epoch_losses):.4f}")

    if log_path is not None:
        write_jsonl(log_path, log)
    return model, log
