"""Per-path top-k retrieval and the threshold/duplicate access policy."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .catalog import Catalog, SimilarityWeights, similarity
from .errors import InputError
from .splitter import KnowledgePaths

PRIORITY = {"main": 0, "paired": 1, "other": 2}
DEFAULT_K = {"main": 2, "paired": 6, "other": 4}


@dataclass(frozen=True)
class RetrievalConfig:
    k_per_path: Mapping[str, int] = field(default_factory=lambda: dict(DEFAULT_K))
    tau: float = 0.2
    baseline_mode: bool = False
    seed: int = 0
    default_k: int = 4
    weights: SimilarityWeights = SimilarityWeights()

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise InputError(f"tau must lie in [0, 1], got {self.tau}")
        bad = {k: v for k, v in self.k_per_path.items() if int(v) < 1}
        if bad or self.default_k < 1:
            raise InputError(f"k per path must be >= 1, got {bad or self.default_k}")

    def k_for(self, category: str) -> int:
        return int(self.k_per_path.get(category, self.default_k))


@dataclass(frozen=True)
class Scored:
    asset_id: str
    score: float


@dataclass(frozen=True)
class Rejected:
    asset_id: str
    score: float
    category: str
    reason: str


def _rank_key(s: Scored):
    return (-s.score, s.asset_id)


@dataclass
class RetrievedSet:
    categories: dict[str, list[Scored]]
    rejected: list[Rejected] = field(default_factory=list)

    def accepted(self) -> list[tuple[str, Scored]]:
        return [(c, s) for c, items in self.categories.items() for s in items]

    def ids(self, category: str | None = None) -> list[str]:
        if category is not None:
            return [s.asset_id for s in self.categories.get(category, [])]
        return [s.asset_id for _, s in self.accepted()]

    def to_dict(self) -> dict[str, Any]:
        return {
            "categories": {c: [[s.asset_id, s.score] for s in items] for c, items in self.categories.items()},
            "rejected": [[r.asset_id, r.score, r.category, r.reason] for r in self.rejected],
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "RetrievedSet":
        return cls(
            {c: [Scored(a, float(s)) for a, s in items] for c, items in d["categories"].items()},
            [Rejected(a, float(s), c, r) for a, s, c, r in d.get("rejected", [])],
        )


def _prompt_of(request: Any) -> tuple[str, Sequence[float] | None]:
    if isinstance(request, str):
        return request, None
    return request.prompt, getattr(request, "query_vector", None)


def retrieve(paths: KnowledgePaths, catalog: Catalog, request: Any, config: RetrievalConfig) -> RetrievedSet:
    """Top ``k`` per knowledge path, or global top ``sum(k)`` in baseline mode.

    ``request`` is a prompt string or anything with a ``prompt`` attribute.
    Baseline results are still grouped under each asset's partition category.
    """
    prompt, qvec = _prompt_of(request)
    if not prompt or not prompt.strip():
        raise InputError("retrieve: empty prompt")
    unknown = sorted(set(config.k_per_path) - set(paths.categories))
    if unknown:
        raise InputError(f"retrieval config names unknown categories: {', '.join(unknown)}")

    def score(aid: str) -> Scored:
        return Scored(aid, similarity(catalog[aid], prompt, qvec, config.weights))

    out: dict[str, list[Scored]] = {}
    if config.baseline_mode:
        total = sum(config.k_for(c) for c in paths.categories)
        ranked = sorted((score(a.id) for a in catalog), key=_rank_key)[:total]
        owner = {aid: c for c, ids in paths.partition.items() for aid in ids}
        for c in paths.categories:
            out[c] = [s for s in ranked if owner.get(s.asset_id) == c]
    else:
        for c, ids in paths.partition.items():
            ranked = sorted((score(aid) for aid in ids), key=_rank_key)
            out[c] = ranked[: config.k_for(c)]
    return RetrievedSet(out, [])


def access_filter(retrieved: RetrievedSet, config: RetrievalConfig) -> RetrievedSet:
    """Accept exactly the items scoring >= tau; drop cross-path duplicates.

    A duplicate keeps its best-scoring occurrence, ties resolved by category
    priority main > paired > other, then declared order.
    """
    rejected = list(retrieved.rejected)
    kept: dict[str, list[Scored]] = {}
    for c, items in retrieved.categories.items():
        kept[c] = []
        for s in items:
            if s.score >= config.tau:
                kept[c].append(s)
            else:
                rejected.append(Rejected(s.asset_id, s.score, c, "below-threshold"))

    order = {c: i for i, c in enumerate(kept)}
    best: dict[str, tuple] = {}
    for c, items in kept.items():
        for i, s in enumerate(items):
            key = (-s.score, PRIORITY.get(c, len(PRIORITY)), order[c], i)
            if s.asset_id not in best or key < best[s.asset_id][0]:
                best[s.asset_id] = (key, c, i)

    final: dict[str, list[Scored]] = {}
    for c, items in kept.items():
        final[c] = []
        for i, s in enumerate(items):
            if best[s.asset_id][1:] == (c, i):
                final[c].append(s)
            else:
                rejected.append(Rejected(s.asset_id, s.score, c, "duplicate"))
        final[c].sort(key=_rank_key)
    return RetrievedSet(final, rejected)
