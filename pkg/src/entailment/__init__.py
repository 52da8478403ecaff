"""Multi-modal entailment classifier: heads, gate fusion, joint loss, training"""

from .examples import make_example, validate_example
from .batch import collate
from .heads import ClassifierHead, classify_head
from .gate import GateUnit, gate_fuse
from .loss import joint_loss, gated_losses, recompute_total
from .model import EntailmentModel, build_model
from .inference import forward_example, predict, predict_batch, evaluate_classifier, make_verdict
from .classifier import ModelClassifier, ConstantClassifier, pair_examples
from .training import train_entailment, save_model, load_model
from .gradcheck import run_gradcheck, entailment_cases, TINY_CONFIG

__all__ = [
    "make_example",
    "validate_example",
    "collate",
    "ClassifierHead",
    "classify_head",
    "GateUnit",
    "gate_fuse",
    "joint_loss",
    "gated_losses",
    "recompute_total",
    "EntailmentModel",
    "build_model",
    "forward_example",
    "predict",
    "predict_batch",
    "evaluate_classifier",
    "make_verdict",
    "ModelClassifier",
    "ConstantClassifier",
    "pair_examples",
    "train_entailment",
    "save_model",
    "load_model",
    "run_gradcheck",
    "entailment_cases",
    "TINY_CONFIG",
]
