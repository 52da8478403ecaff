"""
Corpus-level classifiers

Each judges (image_id, caption_id) pairs of a RetrievalCorpus as a
multi-modal entailment problem: the image plus its merged gold captions
is the premise, the caption is the hypothesis.
"""

from typing import Sequence

from .examples import make_example
from .inference import predict_batch, make_verdict
from .model import EntailmentModel
from ..datapipe.premise import merge_premise_captions
from ..models.config import EncoderConfig
from ..models.corpus import RetrievalCorpus
from ..models.entailment import Branch, EntailmentExample, EntailmentVerdict
from ..models.errors import DanglingIdError


def pair_examples(
    corpus: RetrievalCorpus,
    pairs: Sequence[tuple[str, str]],
    config: EncoderConfig | None = None,
) -> list[EntailmentExample]:
    """
    IMAGE_TEXT_TEXT examples for candidate pairs (label set to 0, unknown)

    An image without gold captions has no premise text and is judged as
    IMAGE_TEXT instead.

    Raises:
        DanglingIdError: If a pair references an unknown image or caption
    """
    examples = []
    for image_id, caption_id in pairs:
        if image_id not in corpus["images"]:
            raise DanglingIdError(f"Unknown image id in candidate pair: {image_id}")
        if caption_id not in corpus["captions"]:
            raise DanglingIdError(f"Unknown caption id in candidate pair: {caption_id}")
        premise = merge_premise_captions(corpus, image_id)
        examples.append(make_example(
            "IMAGE_TEXT_TEXT" if premise else "IMAGE_TEXT",
            hypothesis=corpus["captions"][caption_id],
            label=0,
            premise_text=premise,
            premise_image=corpus["images"][image_id],
            config=config,
            premise_image_id=image_id,
            hypothesis_id=caption_id,
        ))
    return examples


class ModelClassifier:
    """A trained EntailmentModel, multi-modal head unless a branch is forced"""

    def __init__(self, model: EntailmentModel, branch: Branch | None = None, batch_size: int = 64):
        self.model = model
        self.branch = branch
        self.batch_size = batch_size

    def verdicts(
        self,
        corpus: RetrievalCorpus,
        pairs: Sequence[tuple[str, str]],
        threshold: float,
    ) -> list[EntailmentVerdict]:
        if not pairs:
            return []
        examples = pair_examples(corpus, pairs, self.model.config)
        return predict_batch(examples, self.model, threshold, self.branch, batch_size=self.batch_size)


class ConstantClassifier:
    """Accepts (p=1) or rejects (p=0) every pair"""

    def __init__(self, accept: bool):
        self.accept = accept

    def verdicts(
        self,
        corpus: RetrievalCorpus,
        pairs: Sequence[tuple[str, str]],
        threshold: float,
    ) -> list[EntailmentVerdict]:
        p = 1.0 if self.accept else 0.0
        out = []
        for image_id, caption_id in pairs:
            if image_id not in corpus["images"] or caption_id not in corpus["captions"]:
                raise DanglingIdError(f"Unknown id in candidate pair: ({image_id}, {caption_id})")
            verdict = make_verdict(p, threshold, "multimodal")
            verdict["premise_image_id"] = image_id
            verdict["hypothesis_id"] = caption_id
            out.append(verdict)
        return out
