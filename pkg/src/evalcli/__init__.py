"""Evaluation metrics, reports and tables; the command line lives in src.evalcli.cli"""

from .metrics import (
    gold_relation,
    weak_relation,
    recall_at_k,
    entail_at_k,
    f_beta,
    classification_metrics,
)
from .kappa import fleiss_kappa, ratings_table
from .runs import read_run, write_run, load_entail_relation
from .report import build_report, write_report, read_report, aggregate_seeds, retrieval_metrics, file_hash

__all__ = [
    "gold_relation",
    "weak_relation",
    "recall_at_k",
    "entail_at_k",
    "f_beta",
    "classification_metrics",
    "fleiss_kappa",
    "ratings_table",
    "read_run",
    "write_run",
    "load_entail_relation",
    "build_report",
    "write_report",
    "read_report",
    "aggregate_seeds",
    "retrieval_metrics",
    "file_hash",
]
