"""
Entailment training examples from a corpus with a known relation

Per image and task form: one positive whose hypothesis is a caption of
another image in the same cluster, and one negative whose hypothesis is a
caption from another cluster. The premise text is the image's merged gold
captions.
"""

import random
from typing import Sequence

from .premise import merge_premise_captions
from ..entailment.examples import make_example
from ..models.config import EncoderConfig, TaskForm
from ..models.corpus import RetrievalCorpus, SyntheticOracle
from ..models.entailment import EntailmentExample


def build_entailment_examples(
    corpus: RetrievalCorpus,
    oracle: SyntheticOracle,
    forms: Sequence[TaskForm],
    seed: int = 0,
    config: EncoderConfig | None = None,
) -> list[EntailmentExample]:
    rng = random.Random(seed)
    by_cluster: dict[int, list[str]] = {}
    for caption_id in sorted(corpus["captions"]):
        by_cluster.setdefault(oracle["caption_cluster"][caption_id], []).append(caption_id)

    examples: list[EntailmentExample] = []
    for image_id in sorted(corpus["images"]):
        cluster = oracle["image_cluster"][image_id]
        own = set(corpus["gold"].get(image_id, []))
        positives = [c for c in by_cluster.get(cluster, []) if c not in own]
        negatives = [c for other, ids in sorted(by_cluster.items()) if other != cluster for c in ids]
        premise = merge_premise_captions(corpus, image_id)

        for form in forms:
            if form != "IMAGE_TEXT" and not premise:
                continue
            for label, pool in ((1, positives), (0, negatives)):
                if not pool:
                    continue
                caption_id = rng.choice(pool)
                examples.append(make_example(
                    form,
                    hypothesis=corpus["captions"][caption_id],
                    label=label,
                    premise_text=premise,
                    premise_image=corpus["images"][image_id],
                    config=config,
                    premise_image_id=image_id,
                    hypothesis_id=caption_id,
                ))
    return examples
