"""Corpus ingestion, candidates, revision, statistics and synthetic data"""

from .premise import merge_premise_captions
from .manifest import load_corpus, save_corpus, validate_corpus, empty_corpus, corpus_hash
from .candidates import generate_candidates, lexical_scores
from .revise import revise_corpus, verdict_records
from .stats import corpus_stats
from .synth import (
    synth_generate,
    synthetic_spec,
    cluster_definitions,
    OracleClassifier,
    oracle_predicate,
    save_oracle,
    load_oracle,
    ORACLE_FILENAME,
)
from .examples import build_entailment_examples

__all__ = [
    "merge_premise_captions",
    "load_corpus",
    "save_corpus",
    "validate_corpus",
    "empty_corpus",
    "corpus_hash",
    "generate_candidates",
    "lexical_scores",
    "revise_corpus",
    "verdict_records",
    "corpus_stats",
    "synth_generate",
    "synthetic_spec",
    "cluster_definitions",
    "OracleClassifier",
    "oracle_predicate",
    "save_oracle",
    "load_oracle",
    "ORACLE_FILENAME",
    "build_entailment_examples",
]
