"""
Retrieval Corpus Records

The corpus the retrieval model trains on, the candidate pairs sent for
entailment classification, and the planted-cluster generator settings.
"""

from typing import TypedDict, Literal
try:
    from typing import NotRequired
except ImportError:  # Python < 3.11
    from typing_extensions import NotRequired

import numpy as np

Split = Literal["train", "val", "test"]
CandidateSource = Literal["TOP_K_RETRIEVAL", "RANDOM"]


class WeakEdge(TypedDict):
    """A non-gold (image, caption) pair judged entailed"""
    image: str
    caption: str
    p_entail: float


class RetrievalCorpus(TypedDict):
    """
    Images, captions and their links

    Invariants: every gold/weak id exists; ids are unique; weak and gold
    are disjoint.
    """
    images: dict[str, np.ndarray]    # id -> H x W x C float32 in [0, 1]
    captions: dict[str, str]
    gold: dict[str, list[str]]       # image id -> caption ids, stored order
    weak: list[WeakEdge]
    split: Split

    # Relative file name of each image, kept for save/load round trips
    image_paths: NotRequired[dict[str, str]]


class CandidatePair(TypedDict):
    image_id: str
    caption_id: str
    source: CandidateSource


class SyntheticSpec(TypedDict):
    cluster_count: int
    images_per_cluster: int
    captions_per_image: int
    core_words_per_cluster: int
    core_words_per_caption: int
    filler_words_per_caption: int
    motif_patches: int
    noise: float
    image_size: int
    channels: int
    patch_size: int
    seed: int


class SyntheticOracle(TypedDict):
    """Ground truth of a planted-cluster corpus: entailed iff same cluster"""
    image_cluster: dict[str, int]
    caption_cluster: dict[str, int]


class CorpusStats(TypedDict):
    """Many-to-many match counts over gold plus weak edges"""
    images_per_caption: dict[str, int]
    captions_per_image: dict[str, int]
    max_images_per_caption: int
    max_captions_per_image: int
    caption_histogram: dict[int, int]   # match count -> number of captions
    image_histogram: dict[int, int]     # match count -> number of images
    edge_count: int
    weak_edge_count: int
