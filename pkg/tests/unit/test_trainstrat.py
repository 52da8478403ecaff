"""
Unit Tests for Entailment-Enhanced Retrieval Training

Entailment graph, batch plans, negative filtering, the alpha-scaled update
and ranking.
"""

import math
import random

import numpy as np
import pytest
import torch

from src.entailment import ConstantClassifier
from src.models.errors import ConfigError, DanglingIdError, PlanValidationError
from src.trainstrat import (
    EntailmentGraph,
    build_dual_encoder,
    build_entailment_graph,
    build_optimizer,
    build_scheduler,
    contrastive_step,
    filter_negative,
    load_dual_encoder,
    negative_mask,
    plan_batches,
    rank_run,
    save_dual_encoder,
    score_corpus,
    train_retrieval,
    validate_plan,
)
from src.trainstrat import training
from src.trainstrat.dual_encoder import caption_tensor, image_tensor


@pytest.fixture
def weak_graph(tiny_corpus):
    """Gold graph plus every same-cluster, non-gold pair of cluster 0"""
    corpus, oracle = tiny_corpus
    graph = EntailmentGraph.from_corpus(corpus)
    for image, c in sorted(oracle["image_cluster"].items()):
        for caption, d in sorted(oracle["caption_cluster"].items()):
            if c == d == 0:
                graph.add_entailed((image, caption), 0.9)
    return graph


def _linked_corpus(images, weak, captions_per_image=1):
    """
    Links-only corpus: image i<n> has gold captions c<n>, c<n>.1, ...;
    weak maps image ids to entailed caption ids
    """
    gold = {
        f"i{n}": [f"c{n}"] + [f"c{n}.{k}" for k in range(1, captions_per_image)]
        for n in range(images)
    }
    corpus = {"images": {}, "captions": {}, "gold": gold, "weak": [], "split": "train"}
    graph = EntailmentGraph.from_corpus(corpus)
    for image, captions in weak.items():
        for caption in captions:
            graph.add_entailed((image, caption), 0.9)
    return corpus, graph


def _patches(corpus, pairs, config):
    return image_tensor(corpus, [img for img, _ in pairs], config["patch_size"], torch.float64)


def _ids(corpus, pairs, config):
    return caption_tensor(corpus, [cap for _, cap in pairs], config["vocab_size"], config["max_length"])


# ========== Entailment Graph Tests ==========

class TestEntailmentGraph:
    """Gold plus classifier-judged edges"""

    def test_gold_is_never_weak(self, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        assert not weak_graph.gold & weak_graph.entailed
        # 3 images x 6 captions in cluster 0, of which 6 pairs are gold
        assert len(weak_graph.entailed) == 12

    def test_filter_negative(self, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        image = sorted(corpus["images"])[0]
        gold_caption = corpus["gold"][image][0]
        other_cluster = sorted(corpus["captions"])[-1]
        assert not filter_negative(image, gold_caption, weak_graph)
        assert filter_negative(image, other_cluster, weak_graph)

    def test_build_from_classifier(self, tiny_corpus):
        corpus, _ = tiny_corpus
        image = sorted(corpus["images"])[0]
        candidates = [
            {"image_id": image, "caption_id": corpus["gold"][image][0], "source": "TOP_K_RETRIEVAL"},
            {"image_id": image, "caption_id": sorted(corpus["captions"])[-1], "source": "RANDOM"},
        ]
        graph, verdicts = build_entailment_graph(corpus, ConstantClassifier(True), 0.5, candidates)

        assert len(verdicts) == 1
        assert graph.entailed == {(image, sorted(corpus["captions"])[-1])}

    def test_dangling_candidate(self, tiny_corpus):
        corpus, _ = tiny_corpus
        candidates = [{"image_id": "ghost", "caption_id": sorted(corpus["captions"])[0], "source": "RANDOM"}]
        with pytest.raises(DanglingIdError):
            build_entailment_graph(corpus, ConstantClassifier(True), 0.5, candidates)


# ========== Batch Plan Tests ==========

class TestPlanBatches:
    """Regular/weak alternation"""

    def test_plan_is_valid(self, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        plan = plan_batches(corpus, weak_graph, batch_size=4, alpha=0.3, seed=0)
        validate_plan(plan, weak_graph)

        regular = [b for b in plan["batches"] if b["kind"] == "regular"]
        weak = [b for b in plan["batches"] if b["kind"] == "weak"]
        assert sum(len(b["pairs"]) for b in regular) == 18
        assert all(b["lr_scale"] == 0.3 for b in weak)

        assert len(weak) == len(regular) == 5
        assert all(len(set(b["pairs"])) == len(b["pairs"]) == 4 for b in weak)
        assert plan["batches"][0]["kind"] == "regular"

    def test_deterministic(self, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        assert plan_batches(corpus, weak_graph, 4, 0.3, seed=5) == plan_batches(corpus, weak_graph, 4, 0.3, seed=5)

    def test_weak_batches_off(self, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        plan = plan_batches(corpus, weak_graph, 4, 0.3, seed=0, weak_batches=False)
        assert {b["kind"] for b in plan["batches"]} == {"regular"}

    def test_no_weak_edges(self, tiny_corpus):
        corpus, _ = tiny_corpus
        plan = plan_batches(corpus, EntailmentGraph.from_corpus(corpus), 4, 0.3, seed=0)
        assert len(plan["batches"]) == 5

    def test_weak_batch_drawn_from_incident_edges(self):
        """Top-ups of early batches never take a later batch's incident edges"""
        corpus, graph = _linked_corpus(
            8, weak={f"i{n}": [f"c{(n + 1) % 8}", f"c{(n + 2) % 8}"] for n in range(4, 8)},
        )
        for seed in range(50):
            plan = plan_batches(corpus, graph, batch_size=2, alpha=0.3, seed=seed)
            batches = plan["batches"]
            assert [b["kind"] for b in batches] == ["regular", "weak"] * 4
            for regular, weak in zip(batches[::2], batches[1::2]):
                images = {img for img, _ in regular["pairs"]}
                incident = {pair for pair in graph.entailed if pair[0] in images}
                assert len(weak["pairs"]) == 2
                if len(incident) >= 2:
                    assert set(weak["pairs"]) <= incident, seed

    def test_scarce_weak_edges_still_follow_every_batch(self):
        corpus, graph = _linked_corpus(8, weak={"i0": ["c5"]})
        plan = plan_batches(corpus, graph, batch_size=2, alpha=0.3, seed=0)
        weak = [b for b in plan["batches"] if b["kind"] == "weak"]
        assert len(weak) == 4
        assert all(b["pairs"] == [("i0", "c5")] for b in weak)

    @pytest.mark.parametrize("seed", range(100))
    def test_random_corpora_pass_validation(self, seed):
        rng = random.Random(seed)
        images = rng.randint(1, 12)
        weak = {
            f"i{n}": rng.sample([f"c{m}" for m in range(images) if m != n], rng.randint(0, images - 1))
            for n in range(images)
        }
        corpus, graph = _linked_corpus(images, weak, captions_per_image=rng.randint(1, 3))
        plan = plan_batches(corpus, graph, rng.randint(2, 6), 0.3, seed=seed)
        validate_plan(plan, graph)
        assert {b["lr_scale"] for b in plan["batches"]} <= {1.0, 0.3}

    def test_bad_batch_size(self, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        with pytest.raises(ConfigError):
            plan_batches(corpus, weak_graph, 1, 0.3, seed=0)


class TestValidatePlan:
    """Invalid plans are rejected"""

    @pytest.fixture
    def plan(self, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        return plan_batches(corpus, weak_graph, 4, 0.3, seed=0)

    def test_weak_first(self, plan, weak_graph):
        plan["batches"] = plan["batches"][1:]
        with pytest.raises(PlanValidationError):
            validate_plan(plan, weak_graph)

    def test_two_weak_in_a_row(self, plan, weak_graph):
        weak = next(b for b in plan["batches"] if b["kind"] == "weak")
        index = plan["batches"].index(weak)
        plan["batches"].insert(index, dict(weak))
        with pytest.raises(PlanValidationError):
            validate_plan(plan, weak_graph)

    def test_weak_pair_in_regular_batch(self, plan, weak_graph):
        weak_pair = sorted(weak_graph.entailed)[0]
        plan["batches"][0]["pairs"].append(weak_pair)
        with pytest.raises(PlanValidationError):
            validate_plan(plan, weak_graph)

    def test_wrong_weak_lr_scale(self, plan, weak_graph):
        next(b for b in plan["batches"] if b["kind"] == "weak")["lr_scale"] = 1.0
        with pytest.raises(PlanValidationError):
            validate_plan(plan, weak_graph)


# ========== Contrastive Step Tests ==========

class TestContrastiveStep:
    """Negative filtering and the alpha-scaled update"""

    def test_negative_mask(self, tiny_corpus):
        corpus, _ = tiny_corpus
        image = sorted(corpus["images"])[0]
        other = sorted(corpus["images"])[-1]
        first, second = corpus["gold"][image][:2]
        pairs = [(image, first), (image, second), (other, corpus["gold"][other][0])]
        usable = negative_mask(pairs, EntailmentGraph.from_corpus(corpus))

        assert usable.diagonal().all()
        assert not usable[0, 1] and not usable[1, 0]
        assert usable[0, 2] and usable[2, 0]
        assert negative_mask(pairs, None).all()

    def test_sgd_delta_scales_with_alpha(self, tiny_config, tiny_corpus, weak_graph):
        """A weak step at alpha * lr moves parameters by exactly alpha times the full-lr move"""
        corpus, _ = tiny_corpus
        pairs = [(image, corpus["gold"][image][0]) for image in sorted(corpus["images"])[::2]]
        alpha = 0.3

        deltas = []
        for lr in (1.0, alpha):
            model = build_dual_encoder(tiny_config, seed=0, dtype=torch.float64)
            before = {n: p.detach().clone() for n, p in model.named_parameters()}
            optimizer = build_optimizer(model, "sgd", lr)
            contrastive_step(model, optimizer, corpus, pairs, weak_graph, lr)
            deltas.append({n: p.detach() - before[n] for n, p in model.named_parameters()})

        full, scaled = deltas
        assert any(torch.count_nonzero(d) for d in full.values())
        for name in full:
            assert torch.allclose(scaled[name], alpha * full[name], rtol=1e-9, atol=1e-12), name

    def test_step_reports_masked_negatives(self, tiny_config, tiny_corpus):
        corpus, _ = tiny_corpus
        image = sorted(corpus["images"])[0]
        pairs = [(image, c) for c in corpus["gold"][image]]
        model = build_dual_encoder(tiny_config, seed=0, dtype=torch.float64)
        result = contrastive_step(
            model, build_optimizer(model, "sgd", 0.1), corpus, pairs, EntailmentGraph.from_corpus(corpus), 0.1,
        )
        assert result.masked_negatives == 2
        # every negative is masked, so only positive terms remain
        assert result.loss == pytest.approx(0.0, abs=1e-12)

    def test_uniform_batch_loss(self, tiny_config, tiny_corpus):
        """Zeroed towers give uniform similarities: each direction costs ln 2"""
        corpus, _ = tiny_corpus
        model = build_dual_encoder(tiny_config, seed=0, dtype=torch.float64)
        with torch.no_grad():
            for parameter in model.parameters():
                parameter.zero_()
        images = sorted(corpus["images"])[:2]
        pairs = [(image, corpus["gold"][image][0]) for image in images]

        usable = torch.ones(2, 2, dtype=torch.bool)
        loss = model(_patches(corpus, pairs, tiny_config), _ids(corpus, pairs, tiny_config), usable)["loss"]
        assert float(loss) == pytest.approx(2 * math.log(2), rel=1e-12)

    def test_masking_entailed_caption_lowers_loss(self, tiny_config, tiny_corpus, weak_graph):
        corpus, oracle = tiny_corpus
        first, second = sorted(i for i, c in oracle["image_cluster"].items() if c == 0)[:2]
        other = next(i for i, c in sorted(oracle["image_cluster"].items()) if c != 0)
        pairs = [(image, corpus["gold"][image][0]) for image in (first, second, other)]
        assert (first, pairs[1][1]) in weak_graph.entailed

        model = build_dual_encoder(tiny_config, seed=0, dtype=torch.float64)
        patches, ids = _patches(corpus, pairs, tiny_config), _ids(corpus, pairs, tiny_config)
        usable = negative_mask(pairs, weak_graph)
        masked = model(patches, ids, usable)["loss"]
        unmasked = model(patches, ids, torch.ones_like(usable))["loss"]

        assert not usable[0, 1]
        assert float(masked) < float(unmasked)

    def test_unknown_optimizer(self, tiny_config):
        with pytest.raises(ConfigError):
            build_optimizer(build_dual_encoder(tiny_config), "rmsprop", 0.1)

    def test_cosine_schedule(self):
        model = torch.nn.Linear(1, 1)
        optimizer = torch.optim.SGD(model.parameters(), lr=1.0)
        scheduler = build_scheduler(optimizer, [1.0, 0.5], "cosine")
        assert scheduler.get_last_lr()[0] == pytest.approx(1.0)
        optimizer.step()
        scheduler.step()
        assert optimizer.param_groups[0]["lr"] == pytest.approx(0.25)

    def test_unknown_schedule(self):
        optimizer = torch.optim.SGD(torch.nn.Linear(1, 1).parameters(), lr=1.0)
        with pytest.raises(ConfigError):
            build_scheduler(optimizer, [1.0], "linear")


# ========== Training Loop Tests ==========

class TestTrainRetrieval:
    """Step logs follow the plan"""

    def test_log_alternates(self, tiny_config, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        _, log = train_retrieval(corpus, weak_graph, tiny_config, seed=0, dtype=torch.float64)

        kinds = [record["batch_kind"] for record in log]
        assert kinds[0] == "regular"
        assert all(not (a == b == "weak") for a, b in zip(kinds, kinds[1:]))
        for record in log:
            expected = tiny_config["lr"] * (tiny_config["alpha"] if record["batch_kind"] == "weak" else 1.0)
            assert record["lr_effective"] == pytest.approx(expected)
            assert np.isfinite(record["loss"])

    def test_baseline_has_no_weak_or_masked_steps(self, tiny_config, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        config = {**tiny_config, "negative_filtering": False, "weak_batches": False}
        _, log = train_retrieval(corpus, weak_graph, config, seed=0, dtype=torch.float64)
        assert {r["batch_kind"] for r in log} == {"regular"}
        assert all(r["masked_negatives"] == 0 for r in log)

    def test_same_seed_same_weights(self, tiny_config, tiny_corpus, weak_graph):
        corpus, _ = tiny_corpus
        a, _ = train_retrieval(corpus, weak_graph, tiny_config, seed=3, dtype=torch.float64)
        b, _ = train_retrieval(corpus, weak_graph, tiny_config, seed=3, dtype=torch.float64)
        for (name, p), (_, q) in zip(a.named_parameters(), b.named_parameters()):
            assert torch.equal(p, q), name

    def test_no_linked_caption_is_ever_a_negative(self, monkeypatch, tiny_config, tiny_corpus, weak_graph):
        """Every in-batch (image, caption) pair that is gold or entailed stays masked over a long run"""
        corpus, _ = tiny_corpus
        seen = []

        def recording_step(model, optimizer, corpus, pairs, graph, lr_effective=None):
            result = contrastive_step(model, optimizer, corpus, pairs, graph, lr_effective)
            seen.append((pairs, result.usable))
            return result

        monkeypatch.setattr(training, "contrastive_step", recording_step)
        config = {**tiny_config, "epochs": 20}
        train_retrieval(corpus, weak_graph, config, seed=0, dtype=torch.float64)

        assert len(seen) >= 200
        masked = 0
        for pairs, usable in seen:
            for i, (image, _) in enumerate(pairs):
                for j, (_, caption) in enumerate(pairs):
                    if i != j and (image, caption) in weak_graph:
                        assert not usable[i, j]
                        masked += 1
        assert masked > 0


# ========== Ranking Tests ==========

class TestRanking:
    """Score order with id tie-break"""

    def test_ties_broken_by_id(self):
        scores = np.array([[0.5, 0.9, 0.5], [0.1, 0.1, 0.1]])
        run = rank_run(scores, ["i1", "i2"], ["c1", "c2", "c3"])
        assert run["rankings"] == {"i1": ["c2", "c1", "c3"], "i2": ["c1", "c2", "c3"]}

    def test_image_retrieval_and_depth(self):
        scores = np.array([[0.2, 0.9], [0.8, 0.1]])
        run = rank_run(scores, ["i1", "i2"], ["c1", "c2"], "IMAGE_RETRIEVAL", depth=1)
        assert run["direction"] == "IMAGE_RETRIEVAL"
        assert run["rankings"] == {"c1": ["i2"], "c2": ["i1"]}

    def test_checkpoint_preserves_scores(self, tmp_path, tiny_config, tiny_corpus):
        corpus, _ = tiny_corpus
        model = build_dual_encoder(tiny_config, seed=1, dtype=torch.float64)
        save_dual_encoder(tmp_path / "retrieval.ckpt", model, seed=1)
        restored = load_dual_encoder(tmp_path / "retrieval.ckpt", dtype=torch.float64)

        _, _, before = score_corpus(model, corpus)
        _, _, after = score_corpus(restored, corpus)
        assert before.shape == (9, 18)
        assert np.allclose(before, after)
