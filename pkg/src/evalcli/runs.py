"""
Run files and entailment relation sources

A run file holds one line per query. Text retrieval lines are
{query_image_id, ranked_caption_ids}; image retrieval lines are
{query_caption_id, ranked_image_ids}.

An entailment relation for Entail@K comes from the synthetic oracle, a
classifier verdict file, or a human label file in the manifest's
weak-edge format ({image, caption, p_entail}, p_entail 1 or 0).
"""

import logging
from pathlib import Path

from .metrics import Relation
from ..models.corpus import RetrievalCorpus
from ..models.errors import DanglingIdError, EntailKitValidationError
from ..models.retrieval import Direction, RankedRun
from ..utils.jsonl import read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

RUN_KEYS: dict[str, tuple[str, str]] = {
    "TEXT_RETRIEVAL": ("query_image_id", "ranked_caption_ids"),
    "IMAGE_RETRIEVAL": ("query_caption_id", "ranked_image_ids"),
}


def write_run(path: str | Path, run: RankedRun) -> Path:
    query_key, items_key = RUN_KEYS[run["direction"]]
    return write_jsonl(path, (
        {query_key: query, items_key: run["rankings"][query]}
        for query in sorted(run["rankings"])
    ))


def read_run(path: str | Path, corpus: RetrievalCorpus | None = None) -> RankedRun:
    """
    Raises:
        FileNotFoundError: If the run file is missing
        EntailKitValidationError: Mixed directions, repeated queries or
            duplicate ids within a ranked list
        DanglingIdError: An id absent from the corpus (when one is given)
    """
    records = read_jsonl(path)
    direction: Direction | None = None
    rankings: dict[str, list[str]] = {}
    for number, record in enumerate(records, start=1):
        found = [d for d, (q, _) in RUN_KEYS.items() if q in record]
        if len(found) != 1:
            raise EntailKitValidationError(f"{path}:{number}: not a run record")
        if direction is None:
            direction = found[0]
        elif found[0] != direction:
            raise EntailKitValidationError(f"{path}:{number}: run mixes retrieval directions")
        query_key, items_key = RUN_KEYS[direction]
        query, ranked = record[query_key], list(record.get(items_key, []))
        if query in rankings:
            raise EntailKitValidationError(f"{path}:{number}: query {query!r} appears twice")
        if len(set(ranked)) != len(ranked):
            raise EntailKitValidationError(f"{path}:{number}: duplicate ids in ranked list of {query!r}")
        rankings[query] = ranked

    run = RankedRun(direction=direction or "TEXT_RETRIEVAL", rankings=rankings)
    if corpus is not None:
        check_run(run, corpus)
    return run


def check_run(run: RankedRun, corpus: RetrievalCorpus) -> None:
    queries, items = (
        (corpus["images"], corpus["captions"]) if run["direction"] == "TEXT_RETRIEVAL"
        else (corpus["captions"], corpus["images"])
    )
    for query, ranked in run["rankings"].items():
        if query not in queries:
            raise DanglingIdError(f"Run query {query!r} is not in the corpus")
        for item in ranked:
            if item not in items:
                raise DanglingIdError(f"Run item {item!r} (query {query!r}) is not in the corpus")


def load_entail_relation(path: str | Path, direction: Direction = "TEXT_RETRIEVAL") -> Relation:
    """
    Read a verdict file or a weak-edge label file into a query -> items relation

    Verdict records count when decision is ENTAIL; label records when
    p_entail >= 0.5. Manifest lines of other kinds are skipped.
    """
    relation: dict[str, set[str]] = {}
    skipped = 0
    for record in read_jsonl(path):
        if "premise_image_id" in record:
            pair = (record["premise_image_id"], record["hypothesis_id"])
            positive = record.get("decision") == "ENTAIL"
        elif "image" in record and "caption" in record:
            pair = (record["image"], record["caption"])
            positive = float(record.get("p_entail", 0.0)) >= 0.5
        else:
            skipped += 1
            continue
        if positive:
            query, item = pair if direction == "TEXT_RETRIEVAL" else (pair[1], pair[0])
            relation.setdefault(query, set()).add(item)
    if skipped:
        logger.info(f"Skipped {skipped} records of {path} that carry no image-caption label")
    return relation
