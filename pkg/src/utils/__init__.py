"""Shared helpers: configuration and line-delimited JSON files"""

from .config_manager import ConfigManager, validate_config, config_hash, read_config_file
from .jsonl import read_jsonl, write_jsonl, read_json, write_json

__all__ = [
    "ConfigManager",
    "validate_config",
    "config_hash",
    "read_config_file",
    "read_jsonl",
    "write_jsonl",
    "read_json",
    "write_json",
]
