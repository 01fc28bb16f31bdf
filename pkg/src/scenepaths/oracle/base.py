"""Query/reply envelope shared by every decision oracle."""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Any, Mapping

from ..relations import RELATIONS, coerce_value

log = logging.getLogger(__name__)

KINDS = ("categorize", "score", "children", "relation")


def _require(payload: Mapping[str, Any], *keys: str) -> None:
    missing = [k for k in keys if k not in payload]
    if missing:
        raise ValueError(f"payload missing {', '.join(missing)}")


@dataclass(frozen=True)
class OracleQuery:
    kind: str
    scene_type: str
    payload: Mapping[str, Any]
    budget_id: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown query kind {self.kind!r}")
        p = self.payload
        if self.kind == "categorize":
            _require(p, "asset", "categories")
            if not p["categories"]:
                raise ValueError("categorize needs at least one category")
        elif self.kind == "score":
            if "prompt" in p:
                _require(p, "prompt", "views")
            else:
                _require(p, "asset", "category", "profile")
        elif self.kind == "children":
            _require(p, "parent", "candidates", "max_children")
        elif self.kind == "relation":
            _require(p, "parent", "child", "relation")
            if p["relation"] not in RELATIONS:
                raise ValueError(f"unknown relation {p['relation']!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "scene_type": self.scene_type, "payload": dict(self.payload)}


@dataclass(frozen=True)
class OracleReply:
    kind: str
    answer: Mapping[str, Any]
    transcript: tuple[str, ...] = ()
    latency: float = 0.0
    source: str = "rule"
    valid: bool = True


def parse_answer(query: OracleQuery, answer: Any) -> dict[str, Any]:
    """Validate a raw answer against the query kind's schema.

    Returns the normalized answer; raises ValueError otherwise.
    """
    if not isinstance(answer, Mapping):
        raise ValueError("answer must be an object")
    p = query.payload
    if query.kind == "categorize":
        names = [c["name"] for c in p["categories"]]
        cat = answer.get("category")
        if cat not in names:
            raise ValueError(f"category {cat!r} not among {names}")
        return {"category": cat}
    if query.kind == "score":
        lo, hi = p.get("scale", (0.0, 1.0))
        s = answer.get("score")
        if isinstance(s, bool) or not isinstance(s, (int, float)):
            raise ValueError(f"score must be a number, got {s!r}")
        if not lo <= s <= hi:
            raise ValueError(f"score {s} outside [{lo}, {hi}]")
        return {"score": float(s)}
    if query.kind == "children":
        kids = answer.get("children")
        if not isinstance(kids, list) or not all(isinstance(k, str) for k in kids):
            raise ValueError("children must be a list of ids")
        allowed = {c["id"] for c in p["candidates"]}
        if len(set(kids)) != len(kids) or not set(kids) <= allowed:
            raise ValueError(f"children {kids} not a subset of candidates")
        if len(kids) > int(p["max_children"]):
            raise ValueError(f"{len(kids)} children exceed cap {p['max_children']}")
        return {"children": list(kids)}
    # relation
    if "value" not in answer:
        raise ValueError("relation answer needs 'value'")
    return {"value": coerce_value(p["relation"], answer["value"])}


class Oracle:
    """Base decision oracle. Subclasses implement ``_ask``."""

    source = "base"

    def __init__(self):
        self.calls: list[tuple[str, str]] = []  # (budget_id, kind) per answered query
        self._lock = threading.Lock()

    def ask(self, query: OracleQuery) -> OracleReply:
        if query.kind == "children" and not query.payload["candidates"]:
            return OracleReply("children", {"children": []}, source=self.source)
        reply = self._ask(query)
        with self._lock:
            self.calls.append((query.budget_id, query.kind))
        log.debug("oracle %s answered %s [%s]", self.source, query.kind, query.budget_id)
        return reply

    def _ask(self, query: OracleQuery) -> OracleReply:  # pragma: no cover - abstract
        raise NotImplementedError

    def count(self, kind: str | None = None) -> int:
        return sum(1 for _, k in self.calls if kind is None or k == kind)
