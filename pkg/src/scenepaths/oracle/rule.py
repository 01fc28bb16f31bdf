"""Deterministic oracle answering from a RuleBook."""

from __future__ import annotations

import json
import random
from typing import Any, Mapping

from ..catalog import jaccard, tokenize
from ..errors import OracleError
from ..relations import DISTANCES, ORIENTATIONS, SIDES
from .base import Oracle, OracleQuery, OracleReply, parse_answer
from .rulebook import RuleBook

_FALLBACK_DOMAINS = {"side": SIDES, "orientation": ORIENTATIONS, "distance": DISTANCES}


def _tags(desc: Mapping[str, Any]) -> frozenset[str]:
    return frozenset(str(t).lower() for t in desc.get("tags", ()))


class RuleOracle(Oracle):
    """Answers every query kind from rule tables.

    Uncovered relation keys get a seeded-random answer (support excepted, which
    takes the declared default); each such use increments ``fallbacks``.
    """

    source = "rule"

    def __init__(self, rulebook: RuleBook, seed: int = 0):
        super().__init__()
        self.rulebook = rulebook
        self.seed = seed
        self.fallbacks = 0

    # -- scoring -----------------------------------------------------------

    def membership(self, asset: Mapping[str, Any], category: str, profile: str, scene_type: str) -> float:
        scores = self.rulebook.default_scores
        hint = asset.get("category_hint")
        if hint:
            return scores["hit"] if hint == category else scores["miss"]
        rules = self.rulebook.scene(scene_type)
        tags = _tags(asset)
        if category == "main":
            return scores["hit"] if rules and tags & set(rules.main) else scores["miss"]
        if category == "paired":
            return scores["hit"] if rules and tags & rules.paired_tags else scores["miss"]
        if category == "other":
            return scores["other"]
        # Category unknown to the rulebook: lexical match against its profile.
        asset_tokens = set(tokenize(asset.get("name", "")))
        for t in tags:
            asset_tokens.update(tokenize(t))
        return jaccard(tokenize(profile), asset_tokens)

    # -- tree building -----------------------------------------------------

    def children(self, parent: Mapping[str, Any], candidates, max_children: int, scene_type: str) -> list[str]:
        ptags = _tags(parent)
        rules = self.rulebook.scene(scene_type)
        partners = rules.partners(ptags) if rules else frozenset()
        first, second = [], []
        for cand in candidates:
            ctags = _tags(cand)
            if ctags & partners:
                first.append(cand["id"])
            elif self.rulebook.relation_rule(ptags, ctags) is not None:
                second.append(cand["id"])
        return (first + second)[: max(0, int(max_children))]

    def relation(self, parent: Mapping[str, Any], child: Mapping[str, Any], relation: str, scene_type: str):
        rule = self.rulebook.relation_rule(_tags(parent), _tags(child))
        if rule is not None:
            return rule.values.get(relation, self.rulebook.default_relation[relation])
        if relation == "support":
            return self.rulebook.default_relation["support"]
        with self._lock:
            self.fallbacks += 1
        rng = random.Random(f"{self.seed}|{scene_type}|{parent['id']}|{child['id']}|{relation}")
        return rng.choice(_FALLBACK_DOMAINS[relation])

    # -- dispatch ----------------------------------------------------------

    def _ask(self, query: OracleQuery) -> OracleReply:
        p = query.payload
        st = query.scene_type
        if query.kind == "score":
            if "prompt" in p:
                raise OracleError("rule oracle cannot judge rendered scenes", [json.dumps(query.to_dict(), sort_keys=True)])
            answer: dict[str, Any] = {"score": self.membership(p["asset"], p["category"], p["profile"], st)}
        elif query.kind == "categorize":
            best, best_score = None, -1.0
            for cat in p["categories"]:
                s = self.membership(p["asset"], cat["name"], cat.get("profile", ""), st)
                if s > best_score:
                    best, best_score = cat["name"], s
            answer = {"category": best}
        elif query.kind == "children":
            answer = {"children": self.children(p["parent"], p["candidates"], p["max_children"], st)}
        else:
            answer = {"value": self.relation(p["parent"], p["child"], p["relation"], st)}
        answer = parse_answer(query, answer)
        transcript = (
            json.dumps(query.to_dict(), sort_keys=True, separators=(",", ":")),
            json.dumps(answer, sort_keys=True, separators=(",", ":")),
        )
        return OracleReply(query.kind, answer, transcript, 0.0, self.source, True)
