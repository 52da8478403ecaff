"""
Premise construction
"""

from ..models.corpus import RetrievalCorpus
from ..models.errors import DanglingIdError

SEPARATOR = ". "


def merge_premise_captions(corpus: RetrievalCorpus, image_id: str) -> str:
    """Gold captions of the image joined in stored order with ". " """
    if image_id not in corpus["images"]:
        raise DanglingIdError(f"Unknown image id: {image_id}")
    return SEPARATOR.join(corpus["captions"][cid] for cid in corpus["gold"].get(image_id, []))
