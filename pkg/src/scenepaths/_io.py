from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import yaml

from .errors import InputError


def load_structured(path: str | Path) -> Any:
    """Load a JSON or YAML document, chosen by file extension."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            return yaml.safe_load(text)
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise InputError(f"{path}: not a valid structured file: {exc}") from exc


def dumps(obj: Any) -> str:
    # Canonical, human-readable form; byte-identical for equal inputs.
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")
