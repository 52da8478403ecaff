"""
Configuration Schema

Typed view of the flat configuration resolved by ConfigManager.
Keys mirror defaults.yaml one to one.
"""

from typing import TypedDict, Literal


TaskForm = Literal["TEXT_TEXT", "IMAGE_TEXT", "IMAGE_TEXT_TEXT"]


class EncoderConfig(TypedDict):
    """Dimensions shared by every encoder of the entailment model"""
    hidden_dim: int
    ffn_dim: int
    num_heads: int
    text_layers: int
    image_layers: int
    cross_layers: int
    vocab_size: int
    max_length: int
    image_size: int
    channels: int
    patch_size: int


class ExperimentConfig(EncoderConfig):
    """Full resolved configuration"""

    # ========== Entailment classifier ==========
    head_activation: Literal["softmax", "sigmoid"]
    share_text_encoder: bool
    threshold: float
    train_forms: list[TaskForm]
    entail_lr: float
    entail_epochs: int
    entail_batch_size: int

    # ========== Image masking ==========
    use_mask_augment: bool
    mask_ratio: float
    mask_max_images: int

    # ========== Retrieval training ==========
    batch_size: int
    lr: float
    alpha: float
    epochs: int
    weight_decay: float
    optimizer: Literal["adamw", "sgd"]
    lr_schedule: Literal["constant", "cosine"]
    temperature: float
    embed_dim: int
    negative_filtering: bool
    weak_batches: bool

    # ========== Dataset revision ==========
    candidate_k: int
    random_fraction: float
    candidate_image_fraction: float

    # ========== Synthetic corpus ==========
    cluster_count: int
    images_per_cluster: int
    captions_per_image: int
    core_words_per_cluster: int
    core_words_per_caption: int
    filler_words_per_caption: int
    motif_patches: int
    noise: float

    # ========== Evaluation ==========
    recall_ks: list[int]
    entail_ks: list[int]

    # ========== Run ==========
    seed: int


ENCODER_KEYS: tuple[str, ...] = tuple(EncoderConfig.__annotations__.keys())


def encoder_config(config: ExperimentConfig) -> EncoderConfig:
    """Project the encoder dimensions out of a full configuration"""
    return EncoderConfig(**{key: config[key] for key in ENCODER_KEYS})
