"""
Entailment graph

Directed (image_id, caption_id) edges: the gold links plus the non-gold
pairs a classifier judged entailed. Captions on either edge set are never
used as negatives for that image.
"""

import logging
from dataclasses import dataclass, field

from ..models.corpus import CandidatePair, RetrievalCorpus, WeakEdge
from ..models.entailment import EntailmentClassifier, EntailmentVerdict
from ..models.errors import DanglingIdError
from ..models.retrieval import Pair

logger = logging.getLogger(__name__)


@dataclass
class EntailmentGraph:
    gold: set[Pair] = field(default_factory=set)
    entailed: set[Pair] = field(default_factory=set)
    p_entail: dict[Pair, float] = field(default_factory=dict)

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.gold or pair in self.entailed

    def __len__(self) -> int:
        return len(self.gold) + len(self.entailed)

    def add_entailed(self, pair: Pair, p_entail: float = 1.0) -> None:
        """Gold pairs stay gold; anything else joins the entailed set"""
        if pair in self.gold:
            return
        self.entailed.add(pair)
        self.p_entail[pair] = p_entail

    def weak_edges(self) -> list[WeakEdge]:
        return [
            WeakEdge(image=image, caption=caption, p_entail=self.p_entail.get((image, caption), 1.0))
            for image, caption in sorted(self.entailed)
        ]

    @classmethod
    def from_corpus(cls, corpus: RetrievalCorpus, include_weak: bool = True) -> "EntailmentGraph":
        """Gold links plus, unless excluded, the corpus's existing weak edges"""
        graph = cls(gold={(img, cap) for img, caps in corpus["gold"].items() for cap in caps})
        for edge in (corpus["weak"] if include_weak else []):
            graph.add_entailed((edge["image"], edge["caption"]), edge["p_entail"])
        return graph


def _check_ids(corpus: RetrievalCorpus, image_id: str, caption_id: str) -> None:
    if image_id not in corpus["images"]:
        raise DanglingIdError(f"Candidate references unknown image id: {image_id}")
    if caption_id not in corpus["captions"]:
        raise DanglingIdError(f"Candidate references unknown caption id: {caption_id}")


def build_entailment_graph(
    corpus: RetrievalCorpus,
    classifier: EntailmentClassifier,
    threshold: float,
    candidates: list[CandidatePair],
) -> tuple[EntailmentGraph, list[EntailmentVerdict]]:
    """
    Classify candidate pairs and add the ENTAIL ones to the gold graph

    Returns:
        (graph, verdicts for the non-gold candidates, in candidate order)

    Raises:
        DanglingIdError: If a candidate references an unknown id
    """
    graph = EntailmentGraph.from_corpus(corpus, include_weak=False)

    pending: list[Pair] = []
    for candidate in candidates:
        pair = (candidate["image_id"], candidate["caption_id"])
        _check_ids(corpus, *pair)
        if pair not in graph.gold:
            pending.append(pair)

    verdicts = classifier.verdicts(corpus, pending, threshold) if pending else []
    for pair, verdict in zip(pending, verdicts):
        if verdict["decision"] == "ENTAIL":
            graph.add_entailed(pair, verdict["p_entail"])

    logger.info(
        f"Entailment graph: {len(graph.gold)} gold edges, {len(graph.entailed)} entailed "
        f"of {len(pending)} classified candidates"
    )
    return graph, verdicts


def filter_negative(image_id: str, caption_id: str, graph: EntailmentGraph) -> bool:
    """True iff the caption may serve as a negative for the image"""
    return (image_id, caption_id) not in graph
