"""
Entailment Records

Examples, verdicts, loss breakdowns and mask specifications for the
multi-modal entailment classifier.
"""

from typing import TypedDict, Literal, Protocol, Sequence
try:
    from typing import NotRequired
except ImportError:  # Python < 3.11
    from typing_extensions import NotRequired

from .config import TaskForm
from .corpus import RetrievalCorpus
from .inputs import PatchGrid

Branch = Literal["textual", "visual", "multimodal"]
Decision = Literal["ENTAIL", "NON_ENTAIL"]

# Indicators (theta_t, theta_v, theta_m) implied by each task form
FORM_INDICATORS: dict[str, tuple[int, int, int]] = {
    "TEXT_TEXT": (1, 0, 0),
    "IMAGE_TEXT": (0, 1, 0),
    "IMAGE_TEXT_TEXT": (1, 1, 1),
}

# Head whose probability a verdict reports by default
FORM_BRANCH: dict[str, Branch] = {
    "TEXT_TEXT": "textual",
    "IMAGE_TEXT": "visual",
    "IMAGE_TEXT_TEXT": "multimodal",
}


class EntailmentExample(TypedDict):
    """
    One premise/hypothesis record

    TEXT_TEXT carries the all-black placeholder image; IMAGE_TEXT carries an
    empty premise text; IMAGE_TEXT_TEXT carries both.
    """
    premise_image: PatchGrid
    premise_text: str
    hypothesis: str
    label: int                       # 1 = entailment
    task_form: TaskForm
    indicators: tuple[int, int, int]  # (theta_t, theta_v, theta_m)

    # Provenance for verdict serialization
    premise_image_id: NotRequired[str]
    hypothesis_id: NotRequired[str]


class EntailmentVerdict(TypedDict):
    p_entail: float
    decision: Decision
    threshold: float
    branch: Branch
    premise_image_id: NotRequired[str]
    hypothesis_id: NotRequired[str]


class LossBreakdown(TypedDict):
    """
    Indicator-gated branch losses summed over a batch

    loss_all == loss_t + loss_v + loss_m, where each branch term is
    sum_i theta_i * nll_i. The raw (ungated) per-example NLLs are kept so
    the decomposition can be audited.
    """
    loss_t: float
    loss_v: float
    loss_m: float
    loss_all: float
    nll_t: list[float]
    nll_v: list[float]
    nll_m: list[float]
    indicators: list[tuple[int, int, int]]


class MaskSpec(TypedDict):
    ratio: float
    max_images_per_batch: int
    masked_patch_ids: NotRequired[list[int]]


class EntailmentClassifier(Protocol):
    """Anything that judges (image, caption) pairs of a corpus"""

    def verdicts(
        self,
        corpus: RetrievalCorpus,
        pairs: Sequence[tuple[str, str]],
        threshold: float,
    ) -> list[EntailmentVerdict]:
        ...
