"""
Evaluation Report Records
"""

from typing import TypedDict
try:
    from typing import NotRequired
except ImportError:  # Python < 3.11
    from typing_extensions import NotRequired

REPORT_SCHEMA = "ENTAILKIT-REPORT-1"


class ClassificationMetrics(TypedDict):
    accuracy: float
    precision: float
    recall: float
    f_beta: float
    beta: float
    zero_division: bool  # True when a ratio had an empty denominator and was set to 0
    support: int


class Provenance(TypedDict):
    corpus_hash: str
    config_hash: str
    seed: int
    run_hash: NotRequired[str]


class MetricsReport(TypedDict):
    schema: str
    metrics: dict[str, float]
    provenance: Provenance
    counts: NotRequired[dict[str, int]]
