"""Wire format for remote oracles.

Request body (canonical JSON, UTF-8)::

    {"instructions": str, "kind": str, "payload": {...}, "scene_type": str}

Response body is either ``{"answer": {...}}`` or ``{"text": str}`` where the
text holds exactly one JSON object, optionally inside a ```json fence.
The correlation id travels in the ``X-Budget-Id`` header.
"""

from __future__ import annotations

import json
import re
from typing import Any

from .base import OracleQuery

BUDGET_HEADER = "X-Budget-Id"
_FENCE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def canonical(obj: Any) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def encode_request(query: OracleQuery, instructions: str) -> bytes:
    return canonical({
        "kind": query.kind,
        "scene_type": query.scene_type,
        "payload": dict(query.payload),
        "instructions": instructions,
    })


def decode_request(data: bytes, budget_id: str = "") -> tuple[OracleQuery, str]:
    obj = json.loads(data.decode("utf-8"))
    if not isinstance(obj, dict) or set(obj) != {"kind", "scene_type", "payload", "instructions"}:
        raise ValueError("request must have exactly kind, scene_type, payload, instructions")
    return OracleQuery(obj["kind"], obj["scene_type"], obj["payload"], budget_id), obj["instructions"]


def encode_response(answer: dict[str, Any]) -> bytes:
    return canonical({"answer": answer})


def extract_block(text: str) -> dict[str, Any]:
    """Pull the single structured answer block out of free model text."""
    fenced = _FENCE.findall(text)
    if len(fenced) > 1:
        raise ValueError("reply contains more than one answer block")
    candidate = fenced[0] if fenced else text
    start, end = candidate.find("{"), candidate.rfind("}")
    if start < 0 or end < start:
        raise ValueError("reply contains no answer block")
    obj = json.loads(candidate[start:end + 1])
    if not isinstance(obj, dict):
        raise ValueError("answer block must be an object")
    return obj


def decode_response(data: bytes) -> dict[str, Any]:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"response is not JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise ValueError("response must be an object")
    if "answer" in obj and isinstance(obj["answer"], dict) and len(obj) == 1:
        return obj["answer"]
    if "text" in obj and isinstance(obj["text"], str):
        return extract_block(obj["text"])
    raise ValueError("response needs a single 'answer' object or 'text'")
