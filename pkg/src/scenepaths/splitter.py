"""Partition a catalog into knowledge paths by argmax alignment."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

from .catalog import Asset, Catalog
from .errors import InputError
from .oracle import Oracle, OracleQuery


@dataclass(frozen=True)
class Category:
    name: str
    profile: str


@dataclass(frozen=True)
class CategorySet:
    categories: tuple[Category, ...]

    def __post_init__(self):
        if not self.categories:
            raise InputError("category set needs at least one category")
        names = [c.name for c in self.categories]
        if any(not n or not n.strip() for n in names):
            raise InputError("category names must be non-empty")
        if len(set(names)) != len(names):
            raise InputError(f"duplicate category names in {names}")

    @classmethod
    def of(cls, *pairs: tuple[str, str]) -> "CategorySet":
        return cls(tuple(Category(n, p) for n, p in pairs))

    @classmethod
    def from_mapping(cls, data: Mapping[str, str] | Iterable[Mapping[str, str]]) -> "CategorySet":
        if isinstance(data, Mapping):
            return cls.of(*data.items())
        return cls(tuple(Category(d["name"], d.get("profile", "")) for d in data))

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.categories]

    def __iter__(self):
        return iter(self.categories)

    def __len__(self) -> int:
        return len(self.categories)


RESIDENTIAL = CategorySet.of(
    ("main", "scene-defining main object without which the room loses its identity"),
    ("paired", "object that habitually appears together with a partner object"),
    ("other", "any remaining furnishing or decor"),
)

SINGLE = CategorySet.of(("all", "any object"))

CATEGORY_SETS = {"residential": RESIDENTIAL, "single": SINGLE}


@dataclass(frozen=True)
class Assignment:
    asset_id: str
    category: str
    score: float
    scores: Mapping[str, float]
    source: str


@dataclass
class KnowledgePaths:
    partition: dict[str, list[str]]
    provenance: dict[str, Assignment] = field(default_factory=dict)
    scene_context: str = ""

    def category_of(self, asset_id: str) -> str:
        for name, ids in self.partition.items():
            if asset_id in ids:
                return name
        raise KeyError(asset_id)

    @property
    def categories(self) -> list[str]:
        return list(self.partition)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scene_context": self.scene_context,
            "partition": {k: list(v) for k, v in self.partition.items()},
            "provenance": {
                aid: {"category": a.category, "score": a.score, "scores": dict(a.scores), "source": a.source}
                for aid, a in self.provenance.items()
            },
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "KnowledgePaths":
        prov = {
            aid: Assignment(aid, r["category"], float(r["score"]), dict(r.get("scores", {})), r.get("source", ""))
            for aid, r in d.get("provenance", {}).items()
        }
        return cls({k: list(v) for k, v in d["partition"].items()}, prov, d.get("scene_context", ""))


def align(asset: Asset, category: Category, scene_context: str, oracle: Oracle) -> float:
    """Alignment of ``asset`` with ``category`` for a scene, as judged by the oracle."""
    if not category.profile or not category.profile.strip():
        raise InputError(f"category {category.name!r} has an empty profile")
    query = OracleQuery(
        "score",
        scene_context,
        {"asset": asset.descriptor(), "category": category.name, "profile": category.profile},
        budget_id=f"split:{asset.id}:{category.name}",
    )
    return float(oracle.ask(query).answer["score"])


ScoreFn = Callable[[Asset, Category, str], float]


def split(catalog: Catalog, categories: CategorySet, scene_context: str, oracle: Oracle | None = None, *,
          score_fn: ScoreFn | None = None, workers: int = 1) -> KnowledgePaths:
    """Assign every asset to its argmax category; ties go to the earlier category.

    ``score_fn`` overrides oracle scoring (used for invariance checks).
    """
    if len(catalog) == 0:
        raise InputError("cannot split an empty catalog")
    if score_fn is None:
        if oracle is None:
            raise InputError("split needs an oracle or a score function")
        source = oracle.source

        def score_fn(a: Asset, c: Category, ctx: str) -> float:
            return align(a, c, ctx, oracle)
    else:
        source = "custom"

    if len(categories) == 1:
        only = categories.categories[0]

        def assign(a: Asset) -> Assignment:
            # argmax over a singleton; no scoring needed
            return Assignment(a.id, only.name, 1.0, {only.name: 1.0}, "trivial")
    else:
        def assign(a: Asset) -> Assignment:
            scores = {c.name: score_fn(a, c, scene_context) for c in categories}
            best = categories.categories[0].name
            for c in categories.categories[1:]:
                if scores[c.name] > scores[best]:
                    best = c.name
            return Assignment(a.id, best, scores[best], scores, source)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            assignments = list(pool.map(assign, catalog.assets))
    else:
        assignments = [assign(a) for a in catalog.assets]

    partition: dict[str, list[str]] = {name: [] for name in categories.names}
    provenance = {}
    for a in assignments:
        partition[a.category].append(a.asset_id)
        provenance[a.asset_id] = a
    return KnowledgePaths(partition, provenance, scene_context)
