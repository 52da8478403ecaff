"""
Retrieval and classification metrics

Relations map a query id to the set of item ids that count for it. For
text retrieval the queries are images and the items captions; image
retrieval swaps the two.
"""

import logging
from typing import Callable, Mapping, Sequence

import numpy as np
from sklearn.metrics import accuracy_score, precision_score, recall_score, fbeta_score

from ..models.corpus import RetrievalCorpus
from ..models.entailment import EntailmentVerdict
from ..models.errors import EntailKitValidationError
from ..models.report import ClassificationMetrics
from ..models.retrieval import Direction, RankedRun

logger = logging.getLogger(__name__)

Relation = Mapping[str, set[str]]
Predicate = Callable[[str, str], bool]


def gold_relation(corpus: RetrievalCorpus, direction: Direction = "TEXT_RETRIEVAL") -> dict[str, set[str]]:
    relation: dict[str, set[str]] = {}
    for image_id, caption_ids in corpus["gold"].items():
        for caption_id in caption_ids:
            _link(relation, image_id, caption_id, direction)
    return relation


def weak_relation(corpus: RetrievalCorpus, direction: Direction = "TEXT_RETRIEVAL") -> dict[str, set[str]]:
    relation: dict[str, set[str]] = {}
    for edge in corpus["weak"]:
        _link(relation, edge["image"], edge["caption"], direction)
    return relation


def _link(relation: dict[str, set[str]], image_id: str, caption_id: str, direction: Direction) -> None:
    query, item = (image_id, caption_id) if direction == "TEXT_RETRIEVAL" else (caption_id, image_id)
    relation.setdefault(query, set()).add(item)


def _as_predicate(relation: Relation | Predicate) -> Predicate:
    if callable(relation):
        return relation
    return lambda query, item: item in relation.get(query, ())


def _clamped(ranked: Sequence[str], k: int, name: str, warned: list[bool]) -> int:
    if k > len(ranked) and not warned[0]:
        logger.warning(f"{name}: k={k} exceeds ranked list length {len(ranked)}; clamping")
        warned[0] = True
    return min(k, len(ranked))


def recall_at_k(run: RankedRun, gold: Relation, k: int) -> float:
    """Fraction of queries with at least one gold item in the top k"""
    if k < 1:
        raise EntailKitValidationError(f"k must be >= 1, got {k}")
    if not run["rankings"]:
        return 0.0
    warned = [False]
    hits = []
    for query, ranked in sorted(run["rankings"].items()):
        top = ranked[: _clamped(ranked, k, "recall_at_k", warned)]
        relevant = gold.get(query, set())
        hits.append(1.0 if any(item in relevant for item in top) else 0.0)
    return float(np.mean(hits))


def entail_at_k(
    run: RankedRun,
    gold: Relation,
    entail_relation: Relation | Predicate,
    k: int,
) -> float:
    """
    Mean over queries of (1/K) sum_{i<=K} e_i, e_i = 1 iff item i is gold or entailed

    K is clamped to the list length for short lists.
    """
    if k < 1:
        raise EntailKitValidationError(f"k must be >= 1, got {k}")
    if not run["rankings"]:
        return 0.0
    entailed = _as_predicate(entail_relation)
    warned = [False]
    ratios = []
    for query, ranked in sorted(run["rankings"].items()):
        depth = _clamped(ranked, k, "entail_at_k", warned)
        if depth == 0:
            ratios.append(0.0)
            continue
        relevant = gold.get(query, set())
        e = [1.0 if item in relevant or entailed(query, item) else 0.0 for item in ranked[:depth]]
        ratios.append(float(np.mean(e)))
    return float(np.mean(ratios))


def f_beta(precision: float, recall: float, beta: float = 0.5) -> float:
    """(1 + b^2) P R / (b^2 P + R); 0 when both are 0"""
    denominator = beta**2 * precision + recall
    if denominator == 0:
        return 0.0
    return (1 + beta**2) * precision * recall / denominator


def classification_metrics(
    verdicts: Sequence[EntailmentVerdict] | Sequence[int],
    labels: Sequence[int],
    beta: float = 0.5,
) -> ClassificationMetrics:
    """
    Accuracy, precision, recall and F_beta with ENTAIL as the positive class

    Verdicts may be EntailmentVerdicts or 0/1 predictions. An empty
    precision or recall denominator yields 0 and sets zero_division.

    Raises:
        EntailKitValidationError: On empty or misaligned input
    """
    if not labels:
        raise EntailKitValidationError("classification_metrics needs at least one example")
    if len(verdicts) != len(labels):
        raise EntailKitValidationError(
            f"verdicts ({len(verdicts)}) and labels ({len(labels)}) must align"
        )
    predicted = np.array([
        (1 if v["decision"] == "ENTAIL" else 0) if isinstance(v, dict) else int(v)
        for v in verdicts
    ])
    truth = np.asarray(labels, dtype=int)

    predicted_positive = int(predicted.sum())
    actual_positive = int(truth.sum())
    precision = float(precision_score(truth, predicted, pos_label=1, zero_division=0))
    recall = float(recall_score(truth, predicted, pos_label=1, zero_division=0))
    return ClassificationMetrics(
        accuracy=float(accuracy_score(truth, predicted)),
        precision=precision,
        recall=recall,
        f_beta=float(fbeta_score(truth, predicted, beta=beta, pos_label=1, zero_division=0)),
        beta=beta,
        zero_division=predicted_positive == 0 or actual_positive == 0 or precision + recall == 0,
        support=len(labels),
    )
