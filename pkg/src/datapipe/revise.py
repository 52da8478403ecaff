"""
Corpus revision

Candidates the classifier judges ENTAIL become weak edges. Existing weak
edges are kept, so revising twice with the same classifier adds nothing.
"""

import copy
import logging
from pathlib import Path

from .manifest import validate_corpus
from ..models.corpus import CandidatePair, RetrievalCorpus, WeakEdge
from ..models.entailment import EntailmentClassifier, EntailmentVerdict
from ..utils.jsonl import write_jsonl

logger = logging.getLogger(__name__)

VERDICT_FIELDS = ("premise_image_id", "hypothesis_id", "p_entail", "decision", "threshold")


def verdict_records(verdicts: list[EntailmentVerdict]) -> list[dict]:
    return [{key: v[key] for key in VERDICT_FIELDS if key in v} for v in verdicts]


def revise_corpus(
    corpus: RetrievalCorpus,
    classifier: EntailmentClassifier,
    candidates: list[CandidatePair],
    threshold: float = 0.5,
    verdicts_path: str | Path | None = None,
) -> tuple[RetrievalCorpus, list[EntailmentVerdict]]:
    """
    Returns:
        (copy of the corpus with weak edges added, every verdict)
    """
    gold = {(img, cap) for img, caps in corpus["gold"].items() for cap in caps}
    pairs = list(dict.fromkeys(
        (c["image_id"], c["caption_id"]) for c in candidates
        if (c["image_id"], c["caption_id"]) not in gold
    ))
    verdicts = classifier.verdicts(corpus, pairs, threshold) if pairs else []

    revised = copy.copy(corpus)
    revised["weak"] = list(corpus["weak"])
    known = {(e["image"], e["caption"]) for e in revised["weak"]}
    added = 0
    for pair, verdict in zip(pairs, verdicts):
        if verdict["decision"] == "ENTAIL" and pair not in known:
            revised["weak"].append(WeakEdge(image=pair[0], caption=pair[1], p_entail=verdict["p_entail"]))
            known.add(pair)
            added += 1
    validate_corpus(revised)

    if verdicts_path is not None:
        write_jsonl(verdicts_path, verdict_records(verdicts))
    logger.info(f"Revised corpus: {added} new weak edges from {len(pairs)} candidates ({len(revised['weak'])} total)")
    return revised, verdicts
