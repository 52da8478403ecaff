"""
Pytest Configuration and Shared Fixtures

Tests run in float64 with tiny model dimensions. Long statistical
experiments are marked slow and only run with --runslow.
"""

import pytest
import torch

from src.datapipe import synth_generate, synthetic_spec
from src.entailment import build_model, make_example
from src.utils.config_manager import ConfigManager

# Dimensions small enough for finite differences and per-test training
TINY_OVERRIDES = {
    "hidden_dim": 8,
    "ffn_dim": 16,
    "num_heads": 2,
    "text_layers": 1,
    "image_layers": 1,
    "cross_layers": 1,
    "vocab_size": 64,
    "max_length": 16,
    "image_size": 8,
    "channels": 3,
    "patch_size": 4,
    "embed_dim": 8,
    "batch_size": 4,
    "epochs": 1,
    "entail_epochs": 1,
    "entail_batch_size": 8,
    "cluster_count": 3,
    "images_per_cluster": 3,
    "captions_per_image": 2,
    "core_words_per_cluster": 4,
    "core_words_per_caption": 2,
    "filler_words_per_caption": 2,
    "motif_patches": 1,
    "candidate_k": 5,
    "recall_ks": [1, 5],
    "entail_ks": [5],
}


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow synthetic experiments")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# ========== Configuration ==========

@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """No ENTAILKIT_* variable from the developer's shell leaks into a test"""
    import os

    for key in list(os.environ):
        if key.startswith("ENTAILKIT_"):
            monkeypatch.delenv(key)


@pytest.fixture
def tiny_overrides():
    return dict(TINY_OVERRIDES)


@pytest.fixture
def tiny_config():
    return ConfigManager.resolve(overrides=TINY_OVERRIDES, use_env=False)


# ========== Models ==========

@pytest.fixture
def tiny_model(tiny_config):
    return build_model(tiny_config, seed=0, dtype=torch.float64)


# ========== Data ==========

@pytest.fixture
def tiny_corpus(tiny_config):
    """(corpus, oracle) of a 3-cluster planted corpus, noise-free"""
    spec = synthetic_spec({**tiny_config, "noise": 0.0}, seed=0)
    return synth_generate(spec, "train")


@pytest.fixture
def mixed_examples(tiny_config, tiny_corpus):
    """One example of each task form, positives and negatives"""
    corpus, _ = tiny_corpus
    image_ids = sorted(corpus["images"])
    captions = [corpus["captions"][c] for c in sorted(corpus["captions"])]
    examples = []
    for n, form in enumerate(["TEXT_TEXT", "IMAGE_TEXT", "IMAGE_TEXT_TEXT"] * 2):
        examples.append(make_example(
            form,
            hypothesis=captions[n],
            label=n % 2,
            premise_text=captions[n + 1],
            premise_image=corpus["images"][image_ids[n]],
            config=tiny_config,
        ))
    return examples
