"""
Corpus manifests

A manifest is line-delimited JSON with one record per image, caption, gold
link or weak edge, plus an optional split record:

    {"kind": "split", "split": "train"}
    {"kind": "image", "id": "...", "path": "images/x.f32", "shape": [32, 32, 3]}
    {"kind": "caption", "id": "...", "text": "..."}
    {"kind": "gold", "image": "...", "captions": ["...", ...]}
    {"kind": "weak", "image": "...", "caption": "...", "p_entail": 0.93}

Image paths are relative to the manifest. ".f32" files hold raw
little-endian float32 pixels (the record carries the shape); anything else
is read as an 8-bit RGB image through Pillow.
"""

import hashlib
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from ..models.corpus import RetrievalCorpus, WeakEdge
from ..models.errors import (
    CorpusValidationError,
    DanglingIdError,
    DuplicateIdError,
    MissingImageError,
)
from ..utils.jsonl import read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

SPLITS = ("train", "val", "test")


def empty_corpus(split: str = "train") -> RetrievalCorpus:
    return RetrievalCorpus(images={}, captions={}, gold={}, weak=[], split=split)


def validate_corpus(corpus: RetrievalCorpus) -> None:
    """
    Raises:
        DanglingIdError: A gold or weak link names an unknown id
        DuplicateIdError: A caption is linked twice to the same image
        CorpusValidationError: A weak edge duplicates a gold link, or the
            split is unknown
    """
    if corpus["split"] not in SPLITS:
        raise CorpusValidationError(f"Unknown split {corpus['split']!r}; expected one of {SPLITS}")

    gold_pairs: set[tuple[str, str]] = set()
    for image_id, caption_ids in corpus["gold"].items():
        if image_id not in corpus["images"]:
            raise DanglingIdError(f"dangling image id {image_id!r} in gold links")
        for caption_id in caption_ids:
            if caption_id not in corpus["captions"]:
                raise DanglingIdError(f"dangling caption id {caption_id!r} in gold links of image {image_id!r}")
            if (image_id, caption_id) in gold_pairs:
                raise DuplicateIdError(f"Caption {caption_id!r} linked twice to image {image_id!r}")
            gold_pairs.add((image_id, caption_id))

    weak_pairs: set[tuple[str, str]] = set()
    for edge in corpus["weak"]:
        pair = (edge["image"], edge["caption"])
        if pair[0] not in corpus["images"]:
            raise DanglingIdError(f"dangling image id {pair[0]!r} in weak edge")
        if pair[1] not in corpus["captions"]:
            raise DanglingIdError(f"dangling caption id {pair[1]!r} in weak edge")
        if pair in gold_pairs:
            raise CorpusValidationError(f"Weak edge {pair} duplicates a gold link")
        if pair in weak_pairs:
            raise DuplicateIdError(f"Weak edge {pair} listed twice")
        weak_pairs.add(pair)


def _read_image(path: Path, shape: list[int] | None) -> np.ndarray:
    if not path.is_file():
        raise MissingImageError(f"Image file not found: {path}")
    if path.suffix == ".f32":
        if shape is None:
            raise CorpusValidationError(f"Raw image {path} needs a 'shape' in its manifest record")
        return np.fromfile(path, dtype="<f4").reshape(shape).astype(np.float32)
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0


def load_corpus(manifest_path: str | Path) -> RetrievalCorpus:
    """
    Read and validate a manifest

    Raises:
        FileNotFoundError: If the manifest does not exist
        CorpusValidationError: (or a subclass) on any integrity violation
    """
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    corpus = empty_corpus()
    corpus["image_paths"] = {}

    for record in read_jsonl(manifest_path):
        kind = record.get("kind")
        if kind == "split":
            corpus["split"] = record["split"]
        elif kind == "image":
            image_id = record["id"]
            if image_id in corpus["images"]:
                raise DuplicateIdError(f"Duplicate image id {image_id!r}")
            corpus["images"][image_id] = _read_image(root / record["path"], record.get("shape"))
            corpus["image_paths"][image_id] = record["path"]
        elif kind == "caption":
            caption_id = record["id"]
            if caption_id in corpus["captions"]:
                raise DuplicateIdError(f"Duplicate caption id {caption_id!r}")
            corpus["captions"][caption_id] = record["text"]
        elif kind == "gold":
            if record["image"] in corpus["gold"]:
                raise DuplicateIdError(f"Duplicate gold record for image {record['image']!r}")
            corpus["gold"][record["image"]] = list(record["captions"])
        elif kind == "weak":
            corpus["weak"].append(WeakEdge(
                image=record["image"], caption=record["caption"], p_entail=float(record.get("p_entail", 1.0))
            ))
        else:
            raise CorpusValidationError(f"Unknown manifest record kind {kind!r} in {manifest_path}")

    validate_corpus(corpus)
    logger.info(
        f"Loaded corpus {manifest_path}: {len(corpus['images'])} images, {len(corpus['captions'])} captions, "
        f"{len(corpus['weak'])} weak edges ({corpus['split']})"
    )
    return corpus


def save_corpus(corpus: RetrievalCorpus, manifest_path: str | Path, image_format: str = "f32") -> Path:
    """
    Write the manifest and one image file per image

    Images keep their recorded image_paths; new ones go to images/<id>.f32
    (or .png with image_format="png", quantized to 8 bits).
    """
    validate_corpus(corpus)
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    paths = corpus.get("image_paths", {})

    records: list[dict] = [{"kind": "split", "split": corpus["split"]}]
    for image_id in sorted(corpus["images"]):
        image = corpus["images"][image_id]
        relative = paths.get(image_id) or f"images/{image_id}.{image_format}"
        target = root / relative
        target.parent.mkdir(parents=True, exist_ok=True)
        record = {"kind": "image", "id": image_id, "path": relative}
        if target.suffix == ".f32":
            image.astype("<f4").tofile(target)
            record["shape"] = list(image.shape)
        else:
            Image.fromarray(np.clip(np.rint(image * 255.0), 0, 255).astype(np.uint8)).save(target)
        records.append(record)

    records += [{"kind": "caption", "id": cid, "text": corpus["captions"][cid]} for cid in sorted(corpus["captions"])]
    records += [{"kind": "gold", "image": iid, "captions": corpus["gold"][iid]} for iid in sorted(corpus["gold"])]
    records += [
        {"kind": "weak", "image": e["image"], "caption": e["caption"], "p_entail": e["p_entail"]}
        for e in corpus["weak"]
    ]
    write_jsonl(manifest_path, records)
    logger.info(f"Saved corpus to {manifest_path} ({len(corpus['images'])} images)")
    return manifest_path


def corpus_hash(corpus: RetrievalCorpus) -> str:
    """sha256 over ids, texts, links and raw pixels"""
    digest = hashlib.sha256()
    digest.update(corpus["split"].encode())
    for image_id in sorted(corpus["images"]):
        image = np.ascontiguousarray(corpus["images"][image_id], dtype="<f4")
        digest.update(f"image:{image_id}:{image.shape}".encode())
        digest.update(image.tobytes())
    for caption_id in sorted(corpus["captions"]):
        digest.update(f"caption:{caption_id}:{corpus['captions'][caption_id]}".encode())
    for image_id in sorted(corpus["gold"]):
        digest.update(f"gold:{image_id}:{','.join(corpus['gold'][image_id])}".encode())
    for edge in sorted(corpus["weak"], key=lambda e: (e["image"], e["caption"])):
        digest.update(f"weak:{edge['image']}:{edge['caption']}:{edge['p_entail']!r}".encode())
    return digest.hexdigest()
