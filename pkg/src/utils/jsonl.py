"""
Line-delimited JSON files

Used for manifests, run files, verdict files and training logs. Records
are written with sorted keys so identical data gives identical bytes.
"""

import json
from pathlib import Path
from typing import Any, Iterable

from ..models.errors import EntailKitValidationError


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + "\n")
    return path


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    """
    Raises:
        FileNotFoundError: If path does not exist
        EntailKitValidationError: On a line that is not a JSON object
    """
    records = []
    with Path(path).open(encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                raise EntailKitValidationError(f"{path}:{number}: invalid JSON ({e.msg})")
            if not isinstance(record, dict):
                raise EntailKitValidationError(f"{path}:{number}: expected a JSON object")
            records.append(record)
    return records


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise EntailKitValidationError(f"{path}: invalid JSON ({e.msg})")
