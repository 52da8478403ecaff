"""
Config Manager

Centralized configuration: defaults from defaults.yaml, a flat key=value
user file, ENTAILKIT_<KEY> environment overrides and explicit overrides,
in increasing order of precedence.
"""

import os
import json
import hashlib
import logging
from pathlib import Path
from typing import Any

import yaml

from ..models.config import ExperimentConfig
from ..models.errors import ConfigError

logger = logging.getLogger(__name__)

ENV_PREFIX = "ENTAILKIT_"

# Keys whose value is a comma-separated list in flat files
_LIST_KEYS: dict[str, type] = {
    "train_forms": str,
    "recall_ks": int,
    "entail_ks": int,
}

_CHOICES: dict[str, tuple[str, ...]] = {
    "head_activation": ("softmax", "sigmoid"),
    "optimizer": ("adamw", "sgd"),
    "lr_schedule": ("constant", "cosine"),
}

_TASK_FORMS = ("TEXT_TEXT", "IMAGE_TEXT", "IMAGE_TEXT_TEXT")


class ConfigManager:
    """
    Manages the default configuration from defaults.yaml

    Defaults are loaded once and cached; resolve() layers user values on top
    and validates every key against the default's type.
    """

    _defaults: dict[str, Any] | None = None
    _defaults_file_path: Path | None = None

    @classmethod
    def _load_defaults(cls) -> dict[str, Any]:
        """
        Load defaults from YAML file (cached after first load)

        Returns:
            Dictionary of raw default values
        """
        if cls._defaults is not None:
            return cls._defaults

        if cls._defaults_file_path is None:
            project_root = Path(__file__).parent.parent.parent
            cls._defaults_file_path = project_root / "defaults.yaml"

        if not cls._defaults_file_path.exists():
            raise FileNotFoundError(
                f"Defaults file not found: {cls._defaults_file_path}\n"
                f"Expected location: project_root/defaults.yaml"
            )

        logger.info(f"Loading defaults from {cls._defaults_file_path}")

        with open(cls._defaults_file_path, "r") as f:
            cls._defaults = yaml.safe_load(f)

        logger.info(f"Loaded {len(cls._defaults)} configuration keys")

        return cls._defaults

    @classmethod
    def defaults(cls) -> ExperimentConfig:
        """Validated default configuration"""
        raw = cls._load_defaults()
        return ExperimentConfig(**{key: _coerce(key, value, value) for key, value in raw.items()})

    @classmethod
    def keys(cls) -> list[str]:
        return sorted(cls._load_defaults().keys())

    @classmethod
    def resolve(
        cls,
        config_path: str | Path | None = None,
        overrides: dict[str, Any] | None = None,
        use_env: bool = True,
    ) -> ExperimentConfig:
        """
        Resolve the effective configuration

        Args:
            config_path: Optional flat key=value (or flat YAML) file
            overrides: Explicit values, e.g. from CLI flags (None values ignored)
            use_env: Whether ENTAILKIT_<KEY> variables participate

        Returns:
            Fully validated configuration

        Raises:
            ConfigError: Unknown key, bad type or out-of-range value
        """
        raw_defaults = cls._load_defaults()
        resolved: dict[str, Any] = dict(cls.defaults())

        layers: list[tuple[str, dict[str, Any]]] = []
        if config_path is not None:
            layers.append((str(config_path), read_config_file(config_path)))
        if use_env:
            env_values = {
                key[len(ENV_PREFIX):].lower(): _parse_scalar(value)
                for key, value in os.environ.items()
                if key.startswith(ENV_PREFIX) and key[len(ENV_PREFIX):].lower() in raw_defaults
            }
            if env_values:
                layers.append(("environment", env_values))
        if overrides:
            layers.append(("overrides", {k: v for k, v in overrides.items() if v is not None}))

        for source, values in layers:
            for key, value in values.items():
                if key not in raw_defaults:
                    raise ConfigError(
                        f"Unknown config key '{key}' in {source}. "
                        f"Available keys: {', '.join(sorted(raw_defaults))}"
                    )
                resolved[key] = _coerce(key, value, raw_defaults[key])

        config = ExperimentConfig(**resolved)
        validate_config(config)
        return config

    @classmethod
    def reload(cls):
        """
        Reload defaults from file (useful for development/testing)
        """
        cls._defaults = None
        logger.info("Config cache cleared - will reload on next access")


def read_config_file(path: str | Path) -> dict[str, Any]:
    """
    Parse a flat config file

    Lines are `key=value`; blank lines and lines starting with '#' are
    skipped. Files ending in .yaml/.yml are read as a flat YAML mapping.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")

    text = path.read_text(encoding="utf-8")

    if path.suffix in (".yaml", ".yml"):
        data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must contain a flat mapping")
        return data

    values: dict[str, Any] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got '{stripped}'")
        key, value = stripped.split("=", 1)
        values[key.strip()] = _parse_scalar(value.strip())
    return values


def _parse_scalar(text: str) -> Any:
    """Type a raw string the way YAML would ('0.3' -> float, 'true' -> bool)"""
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError:
        return text


def _coerce(key: str, value: Any, default: Any) -> Any:
    if key in _LIST_KEYS:
        item_type = _LIST_KEYS[key]
        items = value if isinstance(value, list) else str(value).split(",")
        try:
            return [item_type(str(item).strip()) for item in items if str(item).strip()]
        except ValueError as e:
            raise ConfigError(f"Config key '{key}' expects a list of {item_type.__name__}: {e}")

    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("on", "off", "true", "false", "yes", "no"):
            return value.lower() in ("on", "true", "yes")
        raise ConfigError(f"Config key '{key}' expects a boolean, got {value!r}")

    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"Config key '{key}' expects an integer, got {value!r}")
        return value

    if isinstance(default, float):
        # PyYAML reads exponent-only literals such as 1e-3 as strings
        if isinstance(value, str):
            try:
                value = float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"Config key '{key}' expects a number, got {value!r}")
        return float(value)

    return str(value)


def validate_config(config: ExperimentConfig) -> None:
    """
    Range checks that types alone cannot express

    Raises:
        ConfigError: On the first violated constraint
    """
    for key, choices in _CHOICES.items():
        if config[key] not in choices:
            raise ConfigError(f"Config key '{key}' must be one of {choices}, got {config[key]!r}")

    for form in config["train_forms"]:
        if form not in _TASK_FORMS:
            raise ConfigError(f"Unknown task form '{form}' in train_forms; expected {_TASK_FORMS}")
    if not config["train_forms"]:
        raise ConfigError("train_forms must name at least one task form")

    if not 0.0 < config["mask_ratio"] < 1.0:
        raise ConfigError(f"mask_ratio must lie in (0, 1), got {config['mask_ratio']}")
    if not 0.0 <= config["alpha"] < 1.0:
        raise ConfigError(f"alpha must lie in [0, 1), got {config['alpha']}")
    if not 0.0 <= config["threshold"] <= 1.0:
        raise ConfigError(f"threshold must lie in [0, 1], got {config['threshold']}")
    if not 0.0 <= config["random_fraction"] <= 1.0:
        raise ConfigError(f"random_fraction must lie in [0, 1], got {config['random_fraction']}")
    if not 0.0 < config["candidate_image_fraction"] <= 1.0:
        raise ConfigError(
            f"candidate_image_fraction must lie in (0, 1], got {config['candidate_image_fraction']}"
        )
    if config["batch_size"] < 2:
        raise ConfigError(f"batch_size must be at least 2, got {config['batch_size']}")
    if config["temperature"] <= 0.0:
        raise ConfigError(f"temperature must be positive, got {config['temperature']}")
    if config["hidden_dim"] % config["num_heads"] != 0:
        raise ConfigError(
            f"hidden_dim ({config['hidden_dim']}) must be divisible by num_heads ({config['num_heads']})"
        )
    if config["image_size"] % config["patch_size"] != 0:
        raise ConfigError(
            f"image_size ({config['image_size']}) must be divisible by patch_size ({config['patch_size']})"
        )
    if config["vocab_size"] <= 3:
        raise ConfigError(f"vocab_size must exceed the 3 special ids, got {config['vocab_size']}")
    if config["max_length"] < 2:
        raise ConfigError(f"max_length must hold at least CLS and SEP, got {config['max_length']}")
    if config["image_layers"] < 1:
        raise ConfigError(f"image_layers must be at least 1, got {config['image_layers']}")
    if any(k < 1 for k in config["recall_ks"] + config["entail_ks"]):
        raise ConfigError("recall_ks and entail_ks must be positive")


def config_hash(config: ExperimentConfig) -> str:
    """sha256 of the canonical JSON form of a configuration"""
    canonical = json.dumps(dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
