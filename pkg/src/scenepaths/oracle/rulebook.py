"""Rule tables backing the deterministic oracle."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .._io import load_structured
from ..errors import InputError, RulebookError
from ..relations import RELATIONS, coerce_value

SCORE_KEYS = ("hit", "miss", "other")


@dataclass(frozen=True)
class SceneRules:
    main: tuple[str, ...] = ()
    pairs: tuple[tuple[str, str], ...] = ()

    @property
    def paired_tags(self) -> frozenset[str]:
        return frozenset(t for pair in self.pairs for t in pair)

    def partners(self, tags: frozenset[str]) -> frozenset[str]:
        """Tags that co-occur with any of ``tags``."""
        out = set()
        for a, b in self.pairs:
            if a in tags:
                out.add(b)
            if b in tags:
                out.add(a)
        return frozenset(out)


@dataclass(frozen=True)
class RelationRule:
    parent: str
    child: str
    values: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RuleBook:
    vocabulary: frozenset[str]
    scenes: Mapping[str, SceneRules]
    relations: tuple[RelationRule, ...]
    default_relation: Mapping[str, Any]
    default_scores: Mapping[str, float]

    def scene(self, scene_type: str) -> SceneRules | None:
        return self.scenes.get(scene_type.strip().lower())

    def relation_rule(self, parent_tags, child_tags) -> RelationRule | None:
        # First rule in declared order whose tags match wins.
        for rule in self.relations:
            if rule.parent in parent_tags and rule.child in child_tags:
                return rule
        return None


def _tag(value: Any, where: str, vocab: frozenset[str]) -> str:
    tag = str(value).strip().lower()
    if tag not in vocab:
        raise RulebookError(f"{where}: dangling tag reference {tag!r}")
    return tag


def rulebook_from_dict(data: Any) -> RuleBook:
    if not isinstance(data, dict) or not data:
        raise RulebookError("rulebook is empty")
    vocab = frozenset(str(t).strip().lower() for t in data.get("vocabulary") or [])
    if not vocab:
        raise RulebookError("rulebook needs a non-empty 'vocabulary'")

    defaults = data.get("defaults") or {}
    rel_default = defaults.get("relation")
    if not isinstance(rel_default, dict) or set(RELATIONS) - set(rel_default):
        raise RulebookError(f"defaults.relation must define {', '.join(RELATIONS)}")
    try:
        rel_default = {r: coerce_value(r, rel_default[r]) for r in RELATIONS}
    except ValueError as exc:
        raise RulebookError(f"defaults.relation: {exc}") from None
    scores = defaults.get("scores")
    if not isinstance(scores, dict) or set(SCORE_KEYS) - set(scores):
        raise RulebookError(f"defaults.scores must define {', '.join(SCORE_KEYS)}")
    scores = {k: float(scores[k]) for k in SCORE_KEYS}
    if not all(0.0 <= v <= 1.0 for v in scores.values()):
        raise RulebookError("defaults.scores must lie in [0, 1]")

    scenes: dict[str, SceneRules] = {}
    for name, spec in (data.get("scenes") or {}).items():
        where = f"scenes.{name}"
        spec = spec or {}
        main = tuple(_tag(t, f"{where}.main", vocab) for t in spec.get("main") or [])
        pairs = []
        for pair in spec.get("pairs") or []:
            if len(pair) != 2:
                raise RulebookError(f"{where}.pairs: each pair needs exactly two tags")
            pairs.append((_tag(pair[0], f"{where}.pairs", vocab), _tag(pair[1], f"{where}.pairs", vocab)))
        scenes[str(name).strip().lower()] = SceneRules(main, tuple(pairs))

    relations = []
    for i, entry in enumerate(data.get("relations") or []):
        where = f"relations[{i}]"
        values = {}
        for r in RELATIONS:
            if r in entry:
                try:
                    values[r] = coerce_value(r, entry[r])
                except ValueError as exc:
                    raise RulebookError(f"{where}: {exc}") from None
        relations.append(RelationRule(_tag(entry.get("parent"), where, vocab), _tag(entry.get("child"), where, vocab), values))

    return RuleBook(vocab, scenes, tuple(relations), rel_default, scores)


def load_rulebook(source: str | Path) -> RuleBook:
    try:
        data = load_structured(source)
    except InputError as exc:
        raise RulebookError(str(exc)) from None
    return rulebook_from_dict(data)


def default_rulebook_path() -> Path:
    return Path(__file__).resolve().parent.parent / "data" / "rulebook.yaml"
