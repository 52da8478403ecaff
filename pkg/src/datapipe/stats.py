"""
Many-to-many statistics over gold plus weak edges
"""

from collections import Counter

from ..models.corpus import CorpusStats, RetrievalCorpus


def corpus_stats(corpus: RetrievalCorpus) -> CorpusStats:
    edges = {(img, cap) for img, caps in corpus["gold"].items() for cap in caps}
    weak = {(e["image"], e["caption"]) for e in corpus["weak"]} - edges
    edges |= weak

    images_per_caption = Counter({cid: 0 for cid in corpus["captions"]})
    captions_per_image = Counter({iid: 0 for iid in corpus["images"]})
    for image_id, caption_id in edges:
        images_per_caption[caption_id] += 1
        captions_per_image[image_id] += 1

    return CorpusStats(
        images_per_caption=dict(sorted(images_per_caption.items())),
        captions_per_image=dict(sorted(captions_per_image.items())),
        max_images_per_caption=max(images_per_caption.values(), default=0),
        max_captions_per_image=max(captions_per_image.values(), default=0),
        caption_histogram=dict(sorted(Counter(images_per_caption.values()).items())),
        image_histogram=dict(sorted(Counter(captions_per_image.values()).items())),
        edge_count=len(edges),
        weak_edge_count=len(weak),
    )
