"""
Unified input convention

Every example is presented as a multi-modal one: textual examples get the
all-black placeholder image, visual examples an empty premise text.
"""

import numpy as np

from ..encoders.patches import black_grid, make_grid
from ..models.config import EncoderConfig, TaskForm
from ..models.entailment import EntailmentExample, FORM_INDICATORS
from ..models.errors import ExampleValidationError
from ..models.inputs import PatchGrid


def make_example(
    task_form: TaskForm,
    hypothesis: str,
    label: int,
    premise_text: str = "",
    premise_image: np.ndarray | PatchGrid | None = None,
    config: EncoderConfig | None = None,
    premise_image_id: str | None = None,
    hypothesis_id: str | None = None,
) -> EntailmentExample:
    """
    Build an example, filling placeholders for the absent modality

    Raises:
        ExampleValidationError: If the result violates the task-form rules
    """
    image_size = config["image_size"] if config else 32
    channels = config["channels"] if config else 3
    patch_size = config["patch_size"] if config else 8

    if task_form == "TEXT_TEXT":
        grid = black_grid(image_size, channels, patch_size)
    elif premise_image is None:
        raise ExampleValidationError(f"{task_form} example needs a premise image")
    elif isinstance(premise_image, dict):
        grid = premise_image
    else:
        grid = make_grid(np.asarray(premise_image, dtype=np.float32), patch_size)

    example = EntailmentExample(
        premise_image=grid,
        premise_text="" if task_form == "IMAGE_TEXT" else premise_text,
        hypothesis=hypothesis,
        label=label,
        task_form=task_form,
        indicators=FORM_INDICATORS[task_form],
    )
    if premise_image_id is not None:
        example["premise_image_id"] = premise_image_id
    if hypothesis_id is not None:
        example["hypothesis_id"] = hypothesis_id
    validate_example(example, config)
    return example


def validate_example(ex: EntailmentExample, config: EncoderConfig | None = None) -> None:
    form = ex.get("task_form")
    if form not in FORM_INDICATORS:
        raise ExampleValidationError(f"Unknown task form: {form}")
    if tuple(ex["indicators"]) != FORM_INDICATORS[form]:
        raise ExampleValidationError(
            f"{form} example must carry indicators {FORM_INDICATORS[form]}, got {tuple(ex['indicators'])}"
        )
    if ex["label"] not in (0, 1):
        raise ExampleValidationError(f"Label must be 0 or 1, got {ex['label']}")

    grid = ex.get("premise_image")
    if grid is None:
        raise ExampleValidationError(f"{form} example has no premise image (use the black placeholder)")
    image = grid["image"]
    if form == "TEXT_TEXT" and np.any(image != 0):
        raise ExampleValidationError("TEXT_TEXT example must carry the all-black placeholder image")
    if form == "IMAGE_TEXT" and ex["premise_text"] != "":
        raise ExampleValidationError("IMAGE_TEXT example must have an empty premise text")
    if form != "IMAGE_TEXT" and not ex["premise_text"].strip():
        raise ExampleValidationError(f"{form} example needs a premise text")

    if config is not None:
        expected = (config["image_size"], config["image_size"], config["channels"])
        if image.shape != expected or grid["patch_size"] != config["patch_size"]:
            raise ExampleValidationError(
                f"Premise image {image.shape} / patch {grid['patch_size']} does not match "
                f"configured {expected} / patch {config['patch_size']}"
            )
