"""
Annotation candidates

For each sampled image one caption is drawn uniformly from its top-k
retrieved non-gold captions; a further random_fraction of that many
uniformly random non-gold pairs is mixed in.
"""

import logging

import numpy as np

from ..encoders.tokenizer import word_ids
from ..models.corpus import CandidatePair, RetrievalCorpus

logger = logging.getLogger(__name__)

# (image ids, caption ids, [I, C] scores); rows/columns follow the id lists
ScoreTable = tuple[list[str], list[str], np.ndarray]


def lexical_scores(corpus: RetrievalCorpus, vocab_size: int = 2048) -> ScoreTable:
    """
    Cosine similarity of hashed bag-of-words vectors between each caption
    and each image's merged gold captions
    """
    image_ids = sorted(corpus["images"])
    caption_ids = sorted(corpus["captions"])

    def bag(texts: list[str]) -> np.ndarray:
        vector = np.zeros(vocab_size, dtype=np.float64)
        for text in texts:
            np.add.at(vector, word_ids(text, vocab_size), 1.0)
        norm = np.linalg.norm(vector)
        return vector / norm if norm else vector

    images = np.stack([bag([corpus["captions"][c] for c in corpus["gold"].get(i, [])]) for i in image_ids]) \
        if image_ids else np.zeros((0, vocab_size))
    captions = np.stack([bag([corpus["captions"][c]]) for c in caption_ids]) \
        if caption_ids else np.zeros((0, vocab_size))
    return image_ids, caption_ids, images @ captions.T


def generate_candidates(
    corpus: RetrievalCorpus,
    retrieval_scores: ScoreTable,
    k: int = 30,
    random_fraction: float = 0.1,
    seed: int = 0,
    image_fraction: float = 1.0,
) -> list[CandidatePair]:
    """
    Returns:
        TOP_K_RETRIEVAL candidates (image order) followed by RANDOM ones;
        never a gold pair, never a duplicate
    """
    image_ids, caption_ids, scores = retrieval_scores
    rng = np.random.default_rng(seed)
    gold = {(img, cap) for img, caps in corpus["gold"].items() for cap in caps}

    if k > len(caption_ids):
        logger.warning(f"Candidate k={k} exceeds caption count {len(caption_ids)}; clamping")
        k = len(caption_ids)

    count = min(len(image_ids), max(1, round(image_fraction * len(image_ids)))) if image_ids else 0
    rows = sorted(rng.choice(len(image_ids), size=count, replace=False).tolist()) if count else []

    positions = np.arange(len(caption_ids))
    candidates: list[CandidatePair] = []
    seen: set[tuple[str, str]] = set()
    for row in rows:
        image_id = image_ids[row]
        top = np.lexsort((positions, -scores[row]))[:k]
        pool = [caption_ids[j] for j in top if (image_id, caption_ids[j]) not in gold]
        if not pool:
            continue
        caption_id = pool[int(rng.integers(len(pool)))]
        candidates.append(CandidatePair(image_id=image_id, caption_id=caption_id, source="TOP_K_RETRIEVAL"))
        seen.add((image_id, caption_id))

    wanted = round(random_fraction * len(candidates))
    if wanted:
        free = [
            (img, cap) for img in image_ids for cap in caption_ids
            if (img, cap) not in gold and (img, cap) not in seen
        ]
        picks = rng.choice(len(free), size=min(wanted, len(free)), replace=False) if free else []
        for index in sorted(int(i) for i in picks):
            image_id, caption_id = free[index]
            candidates.append(CandidatePair(image_id=image_id, caption_id=caption_id, source="RANDOM"))

    logger.info(
        f"Generated {len(candidates)} candidates from {count} images "
        f"(k={k}, {len(candidates) - sum(c['source'] == 'TOP_K_RETRIEVAL' for c in candidates)} random)"
    )
    return candidates
