"""
Unit Tests for the Multi-Modal Entailment Classifier

Task-form conventions, the indicator-gated joint loss, branch isolation,
verdicts and checkpoints.
"""

import math

import numpy as np
import pytest
import torch

from src.diffcore import ParamSet, backward_grad
from src.entailment import (
    ClassifierHead,
    ConstantClassifier,
    GateUnit,
    ModelClassifier,
    build_model,
    classify_head,
    collate,
    forward_example,
    gate_fuse,
    joint_loss,
    load_model,
    make_example,
    make_verdict,
    pair_examples,
    predict,
    predict_batch,
    recompute_total,
    run_gradcheck,
    save_model,
    train_entailment,
)
from src.models.errors import CheckpointFormatError, DanglingIdError, ExampleValidationError


def _examples_of(form, examples):
    return [ex for ex in examples if ex["task_form"] == form]


# ========== Example Construction Tests ==========

class TestMakeExample:
    """Tests for the unified input convention"""

    def test_text_text_gets_black_image(self, tiny_config):
        ex = make_example("TEXT_TEXT", "a dog", 1, premise_text="a dog runs", config=tiny_config)
        assert ex["indicators"] == (1, 0, 0)
        assert ex["premise_image"]["image"].shape == (8, 8, 3)
        assert not ex["premise_image"]["image"].any()

    def test_image_text_drops_premise_text(self, tiny_config):
        image = np.full((8, 8, 3), 0.5, dtype=np.float32)
        ex = make_example("IMAGE_TEXT", "a dog", 0, premise_text="ignored", premise_image=image, config=tiny_config)
        assert ex["premise_text"] == ""
        assert ex["indicators"] == (0, 1, 0)

    def test_image_text_text_indicators(self, tiny_config):
        image = np.full((8, 8, 3), 0.5, dtype=np.float32)
        ex = make_example("IMAGE_TEXT_TEXT", "a dog", 1, premise_text="a dog", premise_image=image, config=tiny_config)
        assert ex["indicators"] == (1, 1, 1)

    def test_visual_form_needs_image(self, tiny_config):
        with pytest.raises(ExampleValidationError):
            make_example("IMAGE_TEXT", "a dog", 1, config=tiny_config)

    def test_textual_form_needs_premise_text(self, tiny_config):
        with pytest.raises(ExampleValidationError):
            make_example("TEXT_TEXT", "a dog", 1, premise_text="  ", config=tiny_config)

    def test_bad_label(self, tiny_config):
        with pytest.raises(ExampleValidationError):
            make_example("TEXT_TEXT", "a dog", 2, premise_text="a dog", config=tiny_config)

    def test_image_geometry_must_match_config(self, tiny_config):
        with pytest.raises(ExampleValidationError):
            make_example(
                "IMAGE_TEXT", "a dog", 1,
                premise_image=np.zeros((16, 16, 3), dtype=np.float32), config=tiny_config,
            )


# ========== Gate and Head Tests ==========

class TestGateFuse:
    """Element-wise gated sum of the textual and visual states"""

    def _zeroed(self, width):
        gate = GateUnit(width).double()
        with torch.no_grad():
            for parameter in gate.parameters():
                parameter.zero_()
        return gate

    def test_zero_gate_averages(self):
        h_t = torch.randn(2, 8, dtype=torch.float64)
        h_v = torch.randn(2, 8, dtype=torch.float64)
        assert torch.allclose(gate_fuse(h_t, h_v, self._zeroed(8)), 0.5 * (h_t + h_v), rtol=0, atol=1e-15)

    def test_zero_states_fuse_to_zero(self):
        torch.manual_seed(0)
        zeros = torch.zeros(8, dtype=torch.float64)
        assert not gate_fuse(zeros, zeros, GateUnit(8).double()).any()

    def test_scalar_case(self):
        params = ParamSet({
            "text_gate.weight": torch.tensor([[2.0]], dtype=torch.float64),
            "text_gate.bias": torch.tensor([-1.0], dtype=torch.float64),
            "visual_gate.weight": torch.tensor([[0.5]], dtype=torch.float64),
            "visual_gate.bias": torch.tensor([0.25], dtype=torch.float64),
        })
        h_t, h_v = 0.8, -1.2
        fused = gate_fuse(
            torch.tensor([h_t], dtype=torch.float64),
            torch.tensor([h_v], dtype=torch.float64),
            GateUnit(1).double(),
            params,
        )

        def sigmoid(x):
            return 1.0 / (1.0 + math.exp(-x))

        expected = sigmoid(2.0 * h_t - 1.0) * h_t + sigmoid(0.5 * h_v + 0.25) * h_v
        assert float(fused[0]) == pytest.approx(expected, rel=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            gate_fuse(torch.zeros(8), torch.zeros(4), GateUnit(8))


class TestClassifyHead:
    """Two-way probabilities from a hidden state"""

    def test_zero_head_is_undecided(self):
        head = ClassifierHead(8).double()
        with torch.no_grad():
            for parameter in head.parameters():
                parameter.zero_()
        probs = classify_head(torch.randn(8, dtype=torch.float64), head)
        assert probs.tolist() == pytest.approx([0.5, 0.5], abs=1e-15)

    @pytest.mark.parametrize("activation", ["softmax", "sigmoid"])
    @pytest.mark.parametrize("seed", range(10))
    def test_probabilities_sum_to_one(self, activation, seed):
        torch.manual_seed(seed)
        head = ClassifierHead(8, activation).double()
        probs = classify_head(torch.randn(8, dtype=torch.float64) * 5, head)
        assert probs.shape == (2,)
        assert (probs >= 0).all()
        assert abs(float(probs.sum()) - 1.0) < 1e-12

    def test_unknown_activation(self):
        with pytest.raises(ValueError):
            ClassifierHead(8, "tanh")


# ========== Joint Loss Tests ==========

class TestJointLoss:
    """The gated loss decomposes exactly into per-example terms"""

    def test_decomposition(self, tiny_model, mixed_examples):
        loss = joint_loss(mixed_examples, tiny_model)

        assert loss["loss_all"] == pytest.approx(loss["loss_t"] + loss["loss_v"] + loss["loss_m"], abs=1e-9)
        assert loss["loss_all"] == pytest.approx(recompute_total(loss), abs=1e-9)
        assert loss["indicators"] == [ex["indicators"] for ex in mixed_examples]

    @pytest.mark.parametrize("forms", [
        ("TEXT_TEXT",), ("IMAGE_TEXT",), ("IMAGE_TEXT_TEXT",), ("TEXT_TEXT", "IMAGE_TEXT", "IMAGE_TEXT_TEXT"),
    ])
    @pytest.mark.parametrize("seed", range(8))
    def test_decomposition_on_random_batches(self, tiny_config, tiny_corpus, tiny_model, forms, seed):
        corpus, _ = tiny_corpus
        rng = np.random.default_rng(seed)
        image_ids = sorted(corpus["images"])
        caption_ids = sorted(corpus["captions"])
        examples = [
            make_example(
                str(rng.choice(forms)),
                hypothesis=corpus["captions"][caption_ids[rng.integers(len(caption_ids))]],
                label=int(rng.integers(2)),
                premise_text=corpus["captions"][caption_ids[rng.integers(len(caption_ids))]],
                premise_image=corpus["images"][image_ids[rng.integers(len(image_ids))]],
                config=tiny_config,
            )
            for _ in range(int(rng.integers(1, 9)))
        ]
        loss = joint_loss(examples, tiny_model)

        assert loss["loss_all"] == pytest.approx(recompute_total(loss), rel=1e-12)
        assert loss["loss_all"] == pytest.approx(loss["loss_t"] + loss["loss_v"] + loss["loss_m"], rel=1e-12)

    def test_textual_batch_has_no_visual_or_fused_loss(self, tiny_model, mixed_examples):
        loss = joint_loss(_examples_of("TEXT_TEXT", mixed_examples), tiny_model)
        assert loss["loss_v"] == 0.0
        assert loss["loss_m"] == 0.0
        assert loss["loss_t"] > 0.0

    def test_empty_batch(self, tiny_model):
        with pytest.raises(ExampleValidationError):
            joint_loss([], tiny_model)


# ========== Branch Isolation Tests ==========

class TestBranchIsolation:
    """Gradients flow only into the branches an example activates"""

    def test_textual_examples_leave_visual_parameters_untouched(self, tiny_config, tiny_model, mixed_examples):
        inputs = collate(_examples_of("TEXT_TEXT", mixed_examples), tiny_config)
        grads = backward_grad(tiny_model, inputs, ParamSet.from_module(tiny_model), loss_name="loss_all")

        visual = tiny_model.visual_parameter_names()
        assert visual
        for name in visual:
            assert torch.count_nonzero(grads[name]) == 0, name
        assert torch.count_nonzero(grads["textual_head.out.bias"]) > 0

    def test_visual_examples_leave_textual_parameters_untouched(self, tiny_config, tiny_model, mixed_examples):
        inputs = collate(_examples_of("IMAGE_TEXT", mixed_examples), tiny_config)
        grads = backward_grad(tiny_model, inputs, ParamSet.from_module(tiny_model), loss_name="loss_all")

        for name in tiny_model.textual_parameter_names():
            assert torch.count_nonzero(grads[name]) == 0, name
        for name, grad in grads.items():
            if name.startswith(("gate.", "multimodal_head.")):
                assert torch.count_nonzero(grad) == 0, name


# ========== Ablation Switch Tests ==========

class TestAblations:
    """Head activation and shared text encoder variants"""

    def test_sigmoid_head_gives_distribution(self, tiny_config, mixed_examples):
        model = build_model(tiny_config, seed=0, dtype=torch.float64, head_activation="sigmoid")
        outputs = model(**collate(mixed_examples, tiny_config))
        for key in ("logp_t", "logp_v", "logp_m"):
            assert torch.allclose(outputs[key].exp().sum(-1), torch.ones(len(mixed_examples), dtype=torch.float64))

    def test_shared_text_encoder_has_no_separate_encoder(self, tiny_config, mixed_examples):
        model = build_model(tiny_config, seed=0, dtype=torch.float64, share_text_encoder=True)
        assert model.text_encoder is None
        assert not any(name.startswith("text_encoder.") for name, _ in model.named_parameters())
        loss = joint_loss(mixed_examples, model)
        assert np.isfinite(loss["loss_all"])


# ========== Inference Tests ==========

class TestInference:
    """Verdicts and per-branch forward results"""

    def test_threshold_rule(self):
        assert make_verdict(0.5, 0.5, "visual")["decision"] == "ENTAIL"
        assert make_verdict(0.4999, 0.5, "visual")["decision"] == "NON_ENTAIL"

    def test_forward_example_reports_active_branches(self, tiny_model, mixed_examples):
        by_form = {ex["task_form"]: ex for ex in mixed_examples}

        assert set(forward_example(by_form["TEXT_TEXT"], tiny_model)["verdicts"]) == {"textual"}
        assert set(forward_example(by_form["IMAGE_TEXT"], tiny_model)["verdicts"]) == {"visual"}
        result = forward_example(by_form["IMAGE_TEXT_TEXT"], tiny_model)
        assert set(result["verdicts"]) == {"textual", "visual", "multimodal"}
        assert set(result["hidden"]) == {"h_t", "h_v", "h_m"}

    def test_batch_matches_single(self, tiny_model, mixed_examples):
        batched = predict_batch(mixed_examples, tiny_model)
        for ex, verdict in zip(mixed_examples, batched):
            assert predict(ex, tiny_model)["p_entail"] == pytest.approx(verdict["p_entail"], abs=1e-9)

    def test_explicit_branch(self, tiny_model, mixed_examples):
        ex = next(e for e in mixed_examples if e["task_form"] == "IMAGE_TEXT_TEXT")
        assert predict(ex, tiny_model)["branch"] == "multimodal"
        assert predict(ex, tiny_model, branch="textual")["branch"] == "textual"


# ========== Corpus Classifier Tests ==========

class TestCorpusClassifiers:
    """Pair examples and classifier adapters over a corpus"""

    def test_pair_examples_use_gold_premise(self, tiny_config, tiny_corpus):
        corpus, _ = tiny_corpus
        image_id = sorted(corpus["images"])[0]
        caption_id = sorted(corpus["captions"])[-1]
        [ex] = pair_examples(corpus, [(image_id, caption_id)], tiny_config)

        assert ex["task_form"] == "IMAGE_TEXT_TEXT"
        assert ex["hypothesis"] == corpus["captions"][caption_id]
        assert corpus["captions"][corpus["gold"][image_id][0]] in ex["premise_text"]
        assert ex["premise_image_id"] == image_id

    def test_pair_examples_dangling(self, tiny_config, tiny_corpus):
        corpus, _ = tiny_corpus
        with pytest.raises(DanglingIdError):
            pair_examples(corpus, [("nope", sorted(corpus["captions"])[0])], tiny_config)

    def test_model_classifier_verdicts_carry_ids(self, tiny_model, tiny_corpus):
        corpus, _ = tiny_corpus
        pairs = [(sorted(corpus["images"])[0], c) for c in sorted(corpus["captions"])[:3]]
        verdicts = ModelClassifier(tiny_model).verdicts(corpus, pairs, 0.5)

        assert [(v["premise_image_id"], v["hypothesis_id"]) for v in verdicts] == pairs
        assert all(v["branch"] == "multimodal" for v in verdicts)

    def test_constant_classifier(self, tiny_corpus):
        corpus, _ = tiny_corpus
        pairs = [(sorted(corpus["images"])[0], sorted(corpus["captions"])[0])]
        assert ConstantClassifier(True).verdicts(corpus, pairs, 0.5)[0]["decision"] == "ENTAIL"
        assert ConstantClassifier(False).verdicts(corpus, pairs, 0.5)[0]["decision"] == "NON_ENTAIL"


# ========== Training Tests ==========

class TestTraining:
    """Joint training and checkpoints"""

    def test_train_logs_every_step(self, tiny_config, mixed_examples):
        model, log = train_entailment(mixed_examples, tiny_config, seed=0, dtype=torch.float64)
        assert len(log) == 1
        assert np.isfinite(log[0]["loss_all"])
        assert log[0]["augmented"] >= 0

    def test_disabled_forms_are_skipped(self, tiny_config, mixed_examples):
        config = {**tiny_config, "train_forms": ["TEXT_TEXT"]}
        no_text = [ex for ex in mixed_examples if ex["task_form"] != "TEXT_TEXT"]
        with pytest.raises(ExampleValidationError):
            train_entailment(no_text, config, seed=0)

    def test_checkpoint_preserves_predictions(self, tmp_path, tiny_model, mixed_examples):
        path = tmp_path / "classifier.ckpt"
        save_model(path, tiny_model, seed=0)
        restored = load_model(path, dtype=torch.float64)

        for a, b in zip(predict_batch(mixed_examples, tiny_model), predict_batch(mixed_examples, restored)):
            assert a["p_entail"] == pytest.approx(b["p_entail"], abs=1e-12)

    def test_retrieval_checkpoint_refused(self, tmp_path):
        from src.diffcore import save_checkpoint

        path = save_checkpoint(tmp_path / "other.ckpt", ParamSet({"w": torch.zeros(1)}), {"kind": "retrieval"})
        with pytest.raises(CheckpointFormatError):
            load_model(path)


# ========== Gradient Check Tests ==========

class TestGradcheck:
    """Classifier graphs pass the finite-difference suite"""

    def test_one_seed(self):
        worst = run_gradcheck([0])
        assert {"textual_head", "visual_branch", "gate", "multimodal"} <= set(worst)
        assert max(worst.values()) < 1e-4

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_classifier_cases_across_seeds(self, seed):
        worst = run_gradcheck([seed], include_primitives=False)
        assert max(worst.values()) < 1e-4

    @pytest.mark.slow
    def test_twenty_seeds(self):
        worst = run_gradcheck(list(range(20)))
        assert max(worst.values()) < 1e-4
