"""Entailment-enhanced retrieval training"""

from .graph import EntailmentGraph, build_entailment_graph, filter_negative
from .plan import plan_batches, validate_plan
from .dual_encoder import DualEncoder, build_dual_encoder, save_dual_encoder, load_dual_encoder
from .contrastive import contrastive_step, negative_mask, build_optimizer, build_scheduler
from .training import train_retrieval
from .ranking import score_corpus, rank_run

__all__ = [
    "EntailmentGraph",
    "build_entailment_graph",
    "filter_negative",
    "plan_batches",
    "validate_plan",
    "DualEncoder",
    "build_dual_encoder",
    "save_dual_encoder",
    "load_dual_encoder",
    "contrastive_step",
    "negative_mask",
    "build_optimizer",
    "build_scheduler",
    "train_retrieval",
    "score_corpus",
    "rank_run",
]
