"""
Planted-cluster synthetic corpus

Each cluster owns a pixel motif (a patch-sized block pattern in the
cluster's color) and a core vocabulary. An image stamps its cluster's
motif into motif_patches random patch slots over uniform noise; its
captions mix core words of the cluster with shared filler words.

Ground truth: image i entails caption c iff both belong to the same
cluster. Cluster definitions depend on the seed alone, instances on
(seed, split), so train and test splits share clusters.

With noise=0 the images of one cluster differ only in the slots the
motif occupies.
"""

import logging
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from matplotlib.colors import hsv_to_rgb

from .manifest import SPLITS
from ..models.config import ExperimentConfig
from ..models.corpus import RetrievalCorpus, SyntheticOracle, SyntheticSpec
from ..models.entailment import EntailmentVerdict
from ..models.errors import ConfigError, DanglingIdError, EntailKitValidationError
from ..models.retrieval import Direction
from ..utils.jsonl import read_json, write_json

logger = logging.getLogger(__name__)

ORACLE_FILENAME = "oracle.json"

FILLER_WORDS = [
    "a", "the", "photo", "of", "with", "some", "near", "scene", "showing",
    "picture", "view", "here", "there", "is", "and", "in",
]
CONSONANTS = "bdfgklmnprstvz"
VOWELS = "aeiou"


class Cluster(NamedTuple):
    color: np.ndarray      # [C] in (0, 1]
    pattern: np.ndarray    # [patch_size, patch_size] bool
    words: list[str]


def synthetic_spec(config: ExperimentConfig, seed: int | None = None) -> SyntheticSpec:
    return SyntheticSpec(
        cluster_count=config["cluster_count"],
        images_per_cluster=config["images_per_cluster"],
        captions_per_image=config["captions_per_image"],
        core_words_per_cluster=config["core_words_per_cluster"],
        core_words_per_caption=config["core_words_per_caption"],
        filler_words_per_caption=config["filler_words_per_caption"],
        motif_patches=config["motif_patches"],
        noise=config["noise"],
        image_size=config["image_size"],
        channels=config["channels"],
        patch_size=config["patch_size"],
        seed=config["seed"] if seed is None else seed,
    )


def _check_spec(spec: SyntheticSpec) -> None:
    slots = (spec["image_size"] // spec["patch_size"]) ** 2
    if spec["image_size"] % spec["patch_size"]:
        raise ConfigError(f"image_size {spec['image_size']} not divisible by patch_size {spec['patch_size']}")
    if not 1 <= spec["motif_patches"] <= slots:
        raise ConfigError(f"motif_patches must lie in [1, {slots}], got {spec['motif_patches']}")
    if spec["core_words_per_caption"] > spec["core_words_per_cluster"]:
        raise ConfigError("core_words_per_caption cannot exceed core_words_per_cluster")
    for key in ("cluster_count", "images_per_cluster", "captions_per_image"):
        if spec[key] < 1:
            raise ConfigError(f"{key} must be >= 1, got {spec[key]}")
    if not 0.0 <= spec["noise"] <= 1.0:
        raise ConfigError(f"noise must lie in [0, 1], got {spec['noise']}")


def _pseudo_word(rng: np.random.Generator, syllables: int = 3) -> str:
    return "".join(rng.choice(list(CONSONANTS)) + rng.choice(list(VOWELS)) for _ in range(syllables))


def cluster_definitions(spec: SyntheticSpec) -> list[Cluster]:
    """Distinct colors, block patterns and core vocabularies, from the seed alone"""
    _check_spec(spec)
    rng = np.random.default_rng([spec["seed"], 0])
    count, channels, p = spec["cluster_count"], spec["channels"], spec["patch_size"]

    offset = rng.uniform(0.0, 1.0 / count)
    clusters: list[Cluster] = []
    used_words: set[str] = set(FILLER_WORDS)
    used_patterns: set[bytes] = set()
    for c in range(count):
        if channels == 3:
            color = hsv_to_rgb([(offset + c / count) % 1.0, 0.85, 0.95])
        else:
            color = np.full(channels, 0.35 + 0.65 * (c + 0.5) / count)

        while True:
            pattern = rng.random((p, p)) < 0.5
            key = pattern.tobytes()
            if pattern.any() and key not in used_patterns:
                used_patterns.add(key)
                break

        words: list[str] = []
        while len(words) < spec["core_words_per_cluster"]:
            word = _pseudo_word(rng)
            if word not in used_words:
                used_words.add(word)
                words.append(word)
        clusters.append(Cluster(np.asarray(color, dtype=np.float32), pattern, words))
    return clusters


def synth_generate(spec: SyntheticSpec, split: str = "train") -> tuple[RetrievalCorpus, SyntheticOracle]:
    """
    Returns:
        (corpus, oracle) for one split
    """
    if split not in SPLITS:
        raise ConfigError(f"Unknown split {split!r}; expected one of {SPLITS}")
    clusters = cluster_definitions(spec)
    rng = np.random.default_rng([spec["seed"], 1 + SPLITS.index(split)])
    size, p, channels = spec["image_size"], spec["patch_size"], spec["channels"]
    grid = size // p

    corpus = RetrievalCorpus(images={}, captions={}, gold={}, weak=[], split=split)
    oracle = SyntheticOracle(image_cluster={}, caption_cluster={})
    for c, cluster in enumerate(clusters):
        motif = cluster.pattern[:, :, None] * cluster.color[None, None, :]
        for n in range(spec["images_per_cluster"]):
            image = np.zeros((size, size, channels), dtype=np.float32)
            for slot in rng.choice(grid * grid, size=spec["motif_patches"], replace=False):
                row, col = divmod(int(slot), grid)
                image[row * p:(row + 1) * p, col * p:(col + 1) * p, :] = motif
            if spec["noise"] > 0:
                image = np.clip(image + rng.uniform(0.0, spec["noise"], size=image.shape), 0.0, 1.0)
            image_id = f"{split}-img-{c:02d}-{n:03d}"
            corpus["images"][image_id] = image.astype(np.float32)
            oracle["image_cluster"][image_id] = c

            caption_ids = []
            for j in range(spec["captions_per_image"]):
                words = list(rng.choice(cluster.words, size=spec["core_words_per_caption"], replace=False))
                words += list(rng.choice(FILLER_WORDS, size=spec["filler_words_per_caption"], replace=True))
                caption_id = f"{split}-cap-{c:02d}-{n:03d}-{j}"
                corpus["captions"][caption_id] = " ".join(str(w) for w in rng.permutation(words))
                oracle["caption_cluster"][caption_id] = c
                caption_ids.append(caption_id)
            corpus["gold"][image_id] = caption_ids

    logger.info(
        f"Generated synthetic {split} corpus: {len(clusters)} clusters, "
        f"{len(corpus['images'])} images, {len(corpus['captions'])} captions"
    )
    return corpus, oracle


def entailed(oracle: SyntheticOracle, image_id: str, caption_id: str) -> bool:
    try:
        return oracle["image_cluster"][image_id] == oracle["caption_cluster"][caption_id]
    except KeyError as e:
        raise DanglingIdError(f"Id {e.args[0]!r} is not covered by the oracle")


def oracle_predicate(oracle: SyntheticOracle, direction: Direction = "TEXT_RETRIEVAL"):
    """(query, item) -> same cluster, for entail_at_k"""
    if direction == "TEXT_RETRIEVAL":
        return lambda query, item: entailed(oracle, query, item)
    return lambda query, item: entailed(oracle, item, query)


class OracleClassifier:
    """Verdicts straight from the planted clusters (p_entail 1 or 0)"""

    def __init__(self, oracle: SyntheticOracle):
        self.oracle = oracle

    def verdicts(
        self,
        corpus: RetrievalCorpus,
        pairs: Sequence[tuple[str, str]],
        threshold: float,
    ) -> list[EntailmentVerdict]:
        out = []
        for image_id, caption_id in pairs:
            p = 1.0 if entailed(self.oracle, image_id, caption_id) else 0.0
            out.append(EntailmentVerdict(
                p_entail=p,
                decision="ENTAIL" if p >= threshold else "NON_ENTAIL",
                threshold=threshold,
                branch="multimodal",
                premise_image_id=image_id,
                hypothesis_id=caption_id,
            ))
        return out


def save_oracle(path: str | Path, oracle: SyntheticOracle) -> Path:
    return write_json(path, oracle)


def load_oracle(path: str | Path) -> SyntheticOracle:
    data = read_json(path)
    if not {"image_cluster", "caption_cluster"} <= set(data):
        raise EntailKitValidationError(f"{path} is not a synthetic oracle file")
    return SyntheticOracle(
        image_cluster={k: int(v) for k, v in data["image_cluster"].items()},
        caption_cluster={k: int(v) for k, v in data["caption_cluster"].items()},
    )
