"""
Metrics reports

A report pairs named scalar metrics with the hashes of everything that
produced them, so two reports agree byte for byte iff their inputs do.
"""

import hashlib
import logging
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .metrics import Predicate, Relation, entail_at_k, gold_relation, recall_at_k
from ..datapipe.manifest import corpus_hash
from ..models.config import ExperimentConfig
from ..models.corpus import RetrievalCorpus
from ..models.errors import EntailKitValidationError
from ..models.report import REPORT_SCHEMA, MetricsReport, Provenance
from ..models.retrieval import RankedRun
from ..utils.config_manager import config_hash
from ..utils.jsonl import read_json, write_json

logger = logging.getLogger(__name__)

DIRECTION_PREFIX = {"TEXT_RETRIEVAL": "TR", "IMAGE_RETRIEVAL": "IR"}


def file_hash(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def runs_hash(paths: Sequence[str | Path]) -> str:
    """Order-independent hash over several run files"""
    digest = hashlib.sha256()
    for value in sorted(file_hash(p) for p in paths):
        digest.update(value.encode())
    return digest.hexdigest()


def retrieval_metrics(
    runs: Sequence[RankedRun],
    corpus: RetrievalCorpus,
    recall_ks: Sequence[int] = (1, 5, 10),
    entail_ks: Sequence[int] = (10, 30),
    entail_relation: Relation | Predicate | None = None,
    manual_relation: Relation | None = None,
) -> dict[str, float]:
    """
    TR@K / IR@K for every run; E@K (and E@M@K for human labels) on the
    text-retrieval run

    Without an entail_relation E@K counts gold items only.
    """
    metrics: dict[str, float] = {}
    for run in runs:
        prefix = DIRECTION_PREFIX[run["direction"]]
        gold = gold_relation(corpus, run["direction"])
        for k in recall_ks:
            metrics[f"{prefix}@{k}"] = recall_at_k(run, gold, k)
        if run["direction"] != "TEXT_RETRIEVAL":
            continue
        for k in entail_ks:
            metrics[f"E@{k}"] = entail_at_k(run, gold, entail_relation or {}, k)
            if manual_relation is not None:
                metrics[f"E@M@{k}"] = entail_at_k(run, gold, manual_relation, k)
    return metrics


def build_report(
    metrics: Mapping[str, float],
    corpus: RetrievalCorpus,
    config: ExperimentConfig,
    seed: int,
    run_paths: Sequence[str | Path] = (),
    counts: Mapping[str, int] | None = None,
) -> MetricsReport:
    for name, value in metrics.items():
        if not 0.0 <= value <= 1.0:
            raise EntailKitValidationError(f"Metric {name} = {value} lies outside [0, 1]")

    provenance = Provenance(corpus_hash=corpus_hash(corpus), config_hash=config_hash(config), seed=seed)
    if run_paths:
        provenance["run_hash"] = runs_hash(run_paths)
    report = MetricsReport(
        schema=REPORT_SCHEMA,
        metrics={name: float(metrics[name]) for name in sorted(metrics)},
        provenance=provenance,
    )
    if counts:
        report["counts"] = {name: int(counts[name]) for name in sorted(counts)}
    return report


def write_report(path: str | Path, report: MetricsReport) -> Path:
    path = write_json(path, report)
    logger.info(f"Wrote report to {path}")
    return path


def read_report(path: str | Path) -> MetricsReport:
    data = read_json(path)
    if not isinstance(data, dict) or data.get("schema") != REPORT_SCHEMA:
        raise EntailKitValidationError(f"{path} is not a {REPORT_SCHEMA} report")
    return MetricsReport(**data)


def aggregate_seeds(reports: Sequence[MetricsReport]) -> dict[str, dict[str, float]]:
    """
    Mean and sample standard deviation of each metric over seeds

    Only metrics present in every report are aggregated; std is 0 for a
    single seed.
    """
    if not reports:
        raise EntailKitValidationError("aggregate_seeds needs at least one report")
    names = set(reports[0]["metrics"])
    for report in reports[1:]:
        names &= set(report["metrics"])

    summary: dict[str, dict[str, float]] = {}
    for name in sorted(names):
        values = np.array([r["metrics"][name] for r in reports], dtype=np.float64)
        summary[name] = {
            "mean": float(values.mean()),
            "std": float(values.std(ddof=1)) if len(values) > 1 else 0.0,
            "n": float(len(values)),
        }
    return summary
