"""
Experiment stages over artifact paths

Each stage reads its inputs from disk and writes its outputs to disk, so
the command line and the experiment graph share one implementation and
every intermediate artifact can be inspected or reused.

Per-seed layout under an output directory:
    train/manifest.jsonl, train/oracle.json
    test/manifest.jsonl, test/oracle.json
    classifier.ckpt, classifier.log.jsonl
    revised/manifest.jsonl, verdicts.jsonl
    retrieval-{on,off}.ckpt, retrieval-{on,off}.log.jsonl, retrieval-{on,off}.loss.svg
    runs-{on,off}/{text,image}.jsonl
    report-{on,off}.json
"""

import logging
from pathlib import Path
from typing import Literal

from ..datapipe import (
    ORACLE_FILENAME,
    build_entailment_examples,
    generate_candidates,
    lexical_scores,
    load_corpus,
    load_oracle,
    oracle_predicate,
    revise_corpus,
    save_corpus,
    save_oracle,
    synth_generate,
    synthetic_spec,
    OracleClassifier,
)
from ..datapipe.synth import entailed
from ..entailment import ModelClassifier, evaluate_classifier, load_model, save_model, train_entailment
from ..evalcli.report import build_report, retrieval_metrics, write_report
from ..evalcli.tables import plot_training_curve
from ..evalcli.runs import load_entail_relation, read_run, write_run
from ..models.config import ExperimentConfig
from ..models.corpus import SyntheticOracle
from ..models.entailment import EntailmentClassifier
from ..models.report import ClassificationMetrics, MetricsReport
from ..trainstrat import EntailmentGraph, load_dual_encoder, rank_run, save_dual_encoder, score_corpus, train_retrieval

logger = logging.getLogger(__name__)

Strategy = Literal["on", "off"]
TASK_FORMS = ("TEXT_TEXT", "IMAGE_TEXT", "IMAGE_TEXT_TEXT")
RUN_FILES = {"TEXT_RETRIEVAL": "text.jsonl", "IMAGE_RETRIEVAL": "image.jsonl"}


def seed_dir(output_dir: str | Path, seed: int) -> Path:
    return Path(output_dir) / f"seed-{seed}"


def oracle_path_for(manifest: str | Path) -> Path:
    return Path(manifest).parent / ORACLE_FILENAME


def synthesize(config: ExperimentConfig, seed: int, out_dir: str | Path, splits=("train", "test")) -> dict[str, str]:
    """Write one manifest (plus oracle sidecar) per split; returns split -> manifest path"""
    spec = synthetic_spec(config, seed)
    paths = {}
    for split in splits:
        corpus, oracle = synth_generate(spec, split)
        manifest = save_corpus(corpus, Path(out_dir) / split / "manifest.jsonl")
        save_oracle(oracle_path_for(manifest), oracle)
        paths[split] = str(manifest)
    return paths


def train_classifier(
    config: ExperimentConfig,
    seed: int,
    train_manifest: str | Path,
    checkpoint: str | Path,
    test_manifest: str | Path | None = None,
) -> dict[str, ClassificationMetrics]:
    """
    Train on examples drawn from the training corpus's oracle

    Returns:
        Held-out metrics per branch when a test manifest is given, else {}
    """
    corpus = load_corpus(train_manifest)
    oracle = load_oracle(oracle_path_for(train_manifest))
    examples = build_entailment_examples(corpus, oracle, config["train_forms"], seed=seed, config=config)
    model, _ = train_entailment(
        examples, config, seed=seed, log_path=Path(checkpoint).with_suffix(".log.jsonl")
    )
    save_model(checkpoint, model, seed=seed)

    if test_manifest is None:
        return {}
    test = load_corpus(test_manifest)
    held_out = build_entailment_examples(
        test, load_oracle(oracle_path_for(test_manifest)), TASK_FORMS, seed=seed, config=config
    )
    return evaluate_classifier(held_out, model, config["threshold"])


def load_classifier(source: str | Path, manifest: str | Path) -> EntailmentClassifier:
    """'oracle' selects the manifest's oracle sidecar; anything else is a checkpoint path"""
    if str(source) == "oracle":
        return OracleClassifier(load_oracle(oracle_path_for(manifest)))
    return ModelClassifier(load_model(source))


def revise(
    config: ExperimentConfig,
    seed: int,
    manifest: str | Path,
    classifier: EntailmentClassifier,
    revised_manifest: str | Path,
    verdicts_path: str | Path | None = None,
) -> dict[str, int]:
    """
    Add classifier-judged weak edges to the corpus and save the result

    Returns:
        Counts; with an oracle sidecar present also planted, recovered and
        false edges among the candidates
    """
    corpus = load_corpus(manifest)
    candidates = generate_candidates(
        corpus,
        lexical_scores(corpus, config["vocab_size"]),
        k=config["candidate_k"],
        random_fraction=config["random_fraction"],
        seed=seed,
        image_fraction=config["candidate_image_fraction"],
    )
    revised, _ = revise_corpus(corpus, classifier, candidates, config["threshold"], verdicts_path)
    save_corpus(revised, revised_manifest)

    counts = {
        "candidates": len(candidates),
        "weak_edges": len(revised["weak"]),
    }
    oracle_file = oracle_path_for(manifest)
    if oracle_file.exists():
        oracle = load_oracle(oracle_file)
        counts.update(edge_recovery(oracle, candidates, revised["weak"]))
        save_oracle(oracle_path_for(revised_manifest), oracle)
    return counts


def edge_recovery(oracle: SyntheticOracle, candidates, weak) -> dict[str, int]:
    planted = {(c["image_id"], c["caption_id"]) for c in candidates if entailed(oracle, c["image_id"], c["caption_id"])}
    accepted = {(e["image"], e["caption"]) for e in weak}
    return {
        "planted_edges": len(planted),
        "recovered_edges": len(planted & accepted),
        "false_edges": len(accepted - planted),
    }


def strategy_config(config: ExperimentConfig, strategy: Strategy) -> ExperimentConfig:
    """Strategy off is the vanilla contrastive baseline: no filtering, no weak batches"""
    if strategy == "on":
        return config
    return ExperimentConfig(**{**config, "negative_filtering": False, "weak_batches": False})


def train_retriever(
    config: ExperimentConfig,
    seed: int,
    manifest: str | Path,
    strategy: Strategy,
    checkpoint: str | Path,
) -> Path:
    corpus = load_corpus(manifest)
    graph = EntailmentGraph.from_corpus(corpus, include_weak=strategy == "on")
    model, log = train_retrieval(
        corpus,
        graph,
        strategy_config(config, strategy),
        seed=seed,
        log_path=Path(checkpoint).with_suffix(".log.jsonl"),
    )
    save_dual_encoder(checkpoint, model, seed=seed)
    plot_training_curve(log, Path(checkpoint).with_suffix(".loss.svg"))
    return Path(checkpoint)


def rank(checkpoint: str | Path, manifest: str | Path, out_dir: str | Path, depth: int | None = None) -> dict[str, str]:
    """Rank the corpus in both directions; returns direction -> run file path"""
    corpus = load_corpus(manifest)
    model = load_dual_encoder(checkpoint)
    image_ids, caption_ids, scores = score_corpus(model, corpus)
    paths = {}
    for direction, filename in RUN_FILES.items():
        run = rank_run(scores, image_ids, caption_ids, direction, depth)
        paths[direction] = str(write_run(Path(out_dir) / filename, run))
    return paths


def evaluate(
    config: ExperimentConfig,
    seed: int,
    manifest: str | Path,
    run_paths: list[str | Path],
    report_path: str | Path,
    relation: str | Path | None = "oracle",
    manual_labels: str | Path | None = None,
) -> MetricsReport:
    """
    Score run files against a corpus and write the report

    Args:
        relation: 'oracle' for the manifest's oracle sidecar, a verdict or
            weak-edge label file, or None for gold-only Entail@K
        manual_labels: Human label file for E@M
    """
    corpus = load_corpus(manifest)
    runs = [read_run(path, corpus) for path in run_paths]

    entail_relation = None
    if relation == "oracle":
        entail_relation = oracle_predicate(load_oracle(oracle_path_for(manifest)))
    elif relation is not None:
        entail_relation = load_entail_relation(relation)
    manual = load_entail_relation(manual_labels) if manual_labels is not None else None

    metrics = retrieval_metrics(
        runs, corpus, config["recall_ks"], config["entail_ks"], entail_relation, manual
    )
    report = build_report(
        metrics,
        corpus,
        config,
        seed,
        run_paths=run_paths,
        counts={"queries": sum(len(r["rankings"]) for r in runs)},
    )
    write_report(report_path, report)
    return report
