"""
Unit Tests for Encoders

Tokenizer packing, patch grids and encoder output contracts.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
import torch

from src.encoders import (
    CrossEncoder,
    ImageEncoder,
    TextEncoder,
    black_grid,
    content,
    cross_encode,
    encode_image,
    encode_text,
    make_grid,
    pack_pair,
    patch_count,
    patchify,
    segment_ids,
    tokenize,
    unpatchify,
    validate_sequence,
)
from src.encoders.layers import MultiHeadAttention
from src.models.inputs import CLS_ID, PAD_ID, SEP_ID


# ========== Tokenizer Tests ==========

class TestTokenizer:
    """Tests for hashing tokenization and pair packing"""

    def test_layout(self):
        seq = tokenize("A dog runs", vocab_size=64, max_length=8)
        assert seq["tokens"][0] == CLS_ID
        assert len(seq["tokens"]) == 8
        assert seq["tokens"][4:] == [PAD_ID] * 4
        assert all(3 <= t < 64 for t in seq["tokens"][1:4])

    def test_case_insensitive(self):
        assert tokenize("Red Ball")["tokens"] == tokenize("red ball")["tokens"]

    def test_long_text_truncated(self):
        seq = tokenize(" ".join(["word"] * 20), max_length=8)
        assert len(seq["tokens"]) == 8
        assert PAD_ID not in seq["tokens"]

    def test_pack_pair_segments(self):
        premise = tokenize("a man rides", max_length=12)
        hypothesis = tokenize("a person", max_length=12)
        packed = pack_pair(premise, hypothesis)

        sep = packed["tokens"].index(SEP_ID)
        assert sep == 4
        assert packed["tokens"][sep + 1:sep + 3] == content(hypothesis)
        segments = segment_ids(packed)
        assert segments[: sep + 1] == [0] * (sep + 1)
        assert segments[sep + 1:] == [1] * (12 - sep - 1)

    def test_pack_pair_truncates_premise_first(self):
        premise = tokenize(" ".join(f"p{i}" for i in range(10)), max_length=8)
        hypothesis = tokenize("h1 h2 h3", max_length=8)
        packed = pack_pair(premise, hypothesis)

        assert packed["tokens"][-3:] == content(hypothesis)
        assert packed["tokens"].count(SEP_ID) == 1
        assert len(packed["tokens"]) == 8

    def test_sequences_satisfy_layout_rules(self):
        premise = tokenize("a man rides a horse", vocab_size=64, max_length=12)
        validate_sequence(premise, 64)
        validate_sequence(pack_pair(premise, tokenize("a person", vocab_size=64, max_length=12)), 64)

    @pytest.mark.parametrize("tokens", [[SEP_ID, 5], [CLS_ID, SEP_ID, 5, SEP_ID], [CLS_ID, 64]])
    def test_malformed_sequence(self, tokens):
        with pytest.raises(ValueError):
            validate_sequence({"tokens": tokens, "max_length": len(tokens)}, 64)


# ========== Patch Grid Tests ==========

class TestPatches:
    """Tests for patch grids"""

    def test_bad_geometry(self):
        with pytest.raises(ValueError):
            make_grid(np.zeros((30, 32, 3)), patch_size=8)
        with pytest.raises(ValueError):
            make_grid(np.zeros((32, 32)), patch_size=8)

    def test_patch_count_and_layout(self):
        image = np.arange(32 * 32 * 3, dtype=np.float64).reshape(32, 32, 3)
        grid = make_grid(image, patch_size=8)
        patches = patchify(grid)

        assert patch_count(grid) == 16
        assert patches.shape == (16, 8 * 8 * 3)
        # second patch starts at pixel (0, 8)
        assert patches[1, 0] == image[0, 8, 0]
        assert np.array_equal(unpatchify(patches, (32, 32), 8, 3), image)

    def test_black_grid(self):
        grid = black_grid(32, 3, 8)
        assert not grid["image"].any()


# ========== Encoder Tests ==========

class TestEncoders:
    """Output shapes and padding invariance"""

    def test_text_cls_ignores_padding(self, tiny_config):
        torch.manual_seed(0)
        encoder = TextEncoder(tiny_config).double()
        short, _ = encode_text(tokenize("red ball bounces", 64, 8), encoder)
        long, _ = encode_text(tokenize("red ball bounces", 64, 16), encoder)
        assert torch.allclose(short, long)

    def test_image_attention_is_distribution(self, tiny_config):
        torch.manual_seed(0)
        encoder = ImageEncoder(tiny_config).double()
        grid = make_grid(np.random.default_rng(0).random((8, 8, 3)), patch_size=4)
        patch_states, summary, profile = encode_image(grid, encoder)

        assert patch_states.shape == (4, tiny_config["hidden_dim"])
        assert summary.shape == (tiny_config["hidden_dim"],)
        assert profile["scores"].shape == (4,)
        assert (profile["scores"] >= 0).all()
        assert profile["scores"].sum() == pytest.approx(1.0)

    def test_cross_encode_depends_on_image(self, tiny_config):
        torch.manual_seed(0)
        image_encoder = ImageEncoder(tiny_config).double()
        cross = CrossEncoder(tiny_config).double()
        hypothesis = tokenize("red ball", 64, 16)
        rng = np.random.default_rng(1)

        states_a, _, _ = encode_image(make_grid(rng.random((8, 8, 3)), 4), image_encoder)
        states_b, _, _ = encode_image(make_grid(rng.random((8, 8, 3)), 4), image_encoder)
        h_a = cross_encode(states_a, hypothesis, cross)
        h_b = cross_encode(states_b, hypothesis, cross)

        assert h_a.shape == (tiny_config["hidden_dim"],)
        assert not torch.allclose(h_a, h_b)

    def test_attention_returns_weights(self, tiny_config):
        torch.manual_seed(0)
        attention = MultiHeadAttention(tiny_config["hidden_dim"], tiny_config["num_heads"]).double()
        x = torch.randn(2, 3, tiny_config["hidden_dim"], dtype=torch.float64)
        context = torch.randn(2, 5, tiny_config["hidden_dim"], dtype=torch.float64)
        out, weights = attention(x, context)

        assert out.shape == x.shape
        assert weights.shape == (2, tiny_config["num_heads"], 3, 5)
        assert torch.allclose(weights.sum(dim=-1), torch.ones(2, tiny_config["num_heads"], 3, dtype=torch.float64))

    def test_image_encoder_keeps_no_activations(self, tiny_config):
        torch.manual_seed(0)
        encoder = ImageEncoder(tiny_config).double()
        encoder(torch.randn(1, 4, 48, dtype=torch.float64))
        for module in encoder.modules():
            assert not any(isinstance(value, torch.Tensor) for value in vars(module).values())

    def test_concurrent_image_encoding(self, tiny_config):
        torch.manual_seed(0)
        encoder = ImageEncoder(tiny_config).double()
        rng = np.random.default_rng(2)
        grids = [make_grid(rng.random((8, 8, 3)), 4) for _ in range(8)]

        serial = [encode_image(grid, encoder)[2]["scores"] for grid in grids]
        with ThreadPoolExecutor(max_workers=4) as pool:
            threaded = [result[2]["scores"] for result in pool.map(lambda g: encode_image(g, encoder), grids)]

        for a, b in zip(serial, threaded):
            assert np.array_equal(a, b)
