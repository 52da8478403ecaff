"""
Joint entailment training

All enabled task forms are shuffled into one stream and trained together
on L_all. Positive image-text examples are mask-augmented per batch.
"""

import logging
import random
from pathlib import Path
from typing import Any

import torch

from .batch import collate
from .loss import breakdown
from .model import EntailmentModel, build_model
from ..augment.masking import augment_batch, mask_spec
from ..diffcore.checkpoint import save_checkpoint, load_checkpoint
from ..diffcore.params import ParamSet
from ..diffcore.runtime import seed_everything
from ..models.config import ExperimentConfig, ENCODER_KEYS
from ..models.entailment import EntailmentExample
from ..models.errors import CheckpointFormatError, DivergenceError, ExampleValidationError
from ..utils.jsonl import write_jsonl

logger = logging.getLogger(__name__)

WEIGHT_DECAY = 0.02


def train_entailment(
    examples: list[EntailmentExample],
    config: ExperimentConfig,
    seed: int | None = None,
    dtype: torch.dtype = torch.float32,
    log_path: str | Path | None = None,
) -> tuple[EntailmentModel, list[dict[str, Any]]]:
    """
    Train a fresh model on the examples whose task form is enabled

    Returns:
        (trained model, per-step log records)

    Raises:
        ExampleValidationError: If no example has an enabled task form
        DivergenceError: If the loss becomes NaN or infinite
    """
    seed = config["seed"] if seed is None else seed
    seed_everything(seed)
    forms = set(config["train_forms"])
    pool = [ex for ex in examples if ex["task_form"] in forms]
    if not pool:
        raise ExampleValidationError(f"No training examples with task forms {sorted(forms)}")

    model = build_model(config, seed=seed, dtype=dtype)
    optimizer = torch.optim.AdamW(model.parameters(), lr=config["entail_lr"], weight_decay=WEIGHT_DECAY)
    spec = mask_spec(config)
    rng = random.Random(seed)
    batch_size = config["entail_batch_size"]

    logger.info(
        f"Training entailment model on {len(pool)} examples "
        f"({config['entail_epochs']} epochs, forms={sorted(forms)}, mask_augment={config['use_mask_augment']})"
    )
    log: list[dict[str, Any]] = []
    step = 0
    for epoch in range(config["entail_epochs"]):
        order = list(range(len(pool)))
        rng.shuffle(order)
        for start in range(0, len(order), batch_size):
            batch = [pool[i] for i in order[start:start + batch_size]]
            if config["use_mask_augment"]:
                batch = augment_batch(batch, spec, model.attention_profiles)
            augmented = len(batch) - min(batch_size, len(order) - start)

            inputs = collate(batch, model.config, dtype)
            optimizer.zero_grad()
            outputs = model(**inputs)
            loss = outputs["loss_all"]
            if not torch.isfinite(loss):
                raise DivergenceError(f"Entailment loss diverged at epoch {epoch}, step {step}: {float(loss)}")
            loss.backward()
            optimizer.step()

            terms = breakdown(outputs, inputs["indicators"])
            log.append({
                "epoch": epoch,
                "step": step,
                "loss_all": terms["loss_all"],
                "loss_t": terms["loss_t"],
                "loss_v": terms["loss_v"],
                "loss_m": terms["loss_m"],
                "augmented": augmented,
            })
            step += 1
        logger.info(f"Epoch {epoch}: mean loss_all {_epoch_mean(log, epoch):.4f}")

    if log_path is not None:
        write_jsonl(log_path, log)
    return model, log


def _epoch_mean(log: list[dict[str, Any]], epoch: int) -> float:
    values = [record["loss_all"] for record in log if record["epoch"] == epoch]
    return sum(values) / max(1, len(values))


def save_model(path: str | Path, model: EntailmentModel, seed: int = 0) -> None:
    """Checkpoint with the architecture recorded in the header"""
    meta = {
        "kind": "entailment",
        "encoder": dict(model.config),
        "head_activation": model.head_activation,
        "share_text_encoder": model.share_text_encoder,
    }
    save_checkpoint(path, ParamSet.from_module(model, rng_seed=seed), meta)


def load_model(path: str | Path, dtype: torch.dtype = torch.float32) -> EntailmentModel:
    params, meta = load_checkpoint(path, dtype=dtype)
    if meta.get("kind") != "entailment":
        raise CheckpointFormatError(f"{path} is not an entailment checkpoint (kind={meta.get('kind')})")
    encoder = {key: meta["encoder"][key] for key in ENCODER_KEYS}
    model = build_model(
        encoder,
        seed=params.rng_seed,
        dtype=dtype,
        head_activation=meta["head_activation"],
        share_text_encoder=meta["share_text_encoder"],
    )
    params.load_into(model)
    return model
