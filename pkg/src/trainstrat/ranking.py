"""
Scoring and ranking a corpus with a trained dual encoder

Ties in score are broken by id ascending in both directions.
"""

import numpy as np
import torch

from .dual_encoder import DualEncoder, image_tensor, caption_tensor
from ..models.corpus import RetrievalCorpus
from ..models.retrieval import Direction, RankedRun


def score_corpus(
    model: DualEncoder,
    corpus: RetrievalCorpus,
    chunk: int = 256,
) -> tuple[list[str], list[str], np.ndarray]:
    """
    Returns:
        (image ids sorted, caption ids sorted, [I, C] cosine similarities)
    """
    image_ids = sorted(corpus["images"])
    caption_ids = sorted(corpus["captions"])
    config = model.config
    dtype = model.log_temperature.dtype
    with torch.no_grad():
        images = torch.cat([
            model.encode_images(image_tensor(corpus, image_ids[i:i + chunk], config["patch_size"], dtype))
            for i in range(0, len(image_ids), chunk)
        ]) if image_ids else torch.zeros(0, config["embed_dim"], dtype=dtype)
        texts = torch.cat([
            model.encode_texts(caption_tensor(corpus, caption_ids[i:i + chunk], config["vocab_size"], config["max_length"]))
            for i in range(0, len(caption_ids), chunk)
        ]) if caption_ids else torch.zeros(0, config["embed_dim"], dtype=dtype)
    scores = torch.matmul(images, texts.transpose(0, 1)).to(torch.float64).numpy()
    return image_ids, caption_ids, scores


def rank_run(
    scores: np.ndarray,
    image_ids: list[str],
    caption_ids: list[str],
    direction: Direction = "TEXT_RETRIEVAL",
    depth: int | None = None,
) -> RankedRun:
    """
    Rank items per query by descending score

    Args:
        scores: [I, C] with rows following image_ids and columns caption_ids,
            both sorted ascending
        depth: Keep only the top depth items per query (None keeps all)
    """
    if direction == "TEXT_RETRIEVAL":
        queries, items, matrix = image_ids, caption_ids, scores
    else:
        queries, items, matrix = caption_ids, image_ids, scores.T

    positions = np.arange(len(items))
    rankings: dict[str, list[str]] = {}
    for row, query in enumerate(queries):
        order = np.lexsort((positions, -matrix[row]))
        if depth is not None:
            order = order[:depth]
        rankings[query] = [items[i] for i in order]
    return RankedRun(direction=direction, rankings=rankings)
