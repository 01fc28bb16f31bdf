"""End-to-end scene generation: split, retrieve, filter, organize, place."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator

from .catalog import Catalog
from .errors import InputError, NoRootError, PipelineError, ScenePathsError
from .layout import LayoutParams, PlacedScene, Room, place
from .oracle import Oracle
from .organizer import LayoutTree, Limits, organize
from .retriever import RetrievalConfig, RetrievedSet, access_filter, retrieve
from .splitter import CATEGORY_SETS, CategorySet, KnowledgePaths, split

STAGES = ("split", "retrieve", "access_filter", "organize", "place")


@dataclass(frozen=True)
class SceneRequest:
    scene_type: str
    room_width: float = 7.0
    room_depth: float = 5.0
    seed: int = 0
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    category_set: str = "residential"
    oracle: str = "rule"
    query: str | None = None  # retrieval prompt; defaults to the scene type

    def __post_init__(self):
        if not self.scene_type or not self.scene_type.strip():
            raise InputError("scene type must be non-empty")
        if self.oracle not in ("rule", "remote"):
            raise InputError(f"oracle must be 'rule' or 'remote', got {self.oracle!r}")
        if not (self.room_width > 0 and self.room_depth > 0):
            raise InputError("room dimensions must be > 0")

    @property
    def prompt(self) -> str:
        return self.query or self.scene_type

    @property
    def room(self) -> Room:
        return Room(self.room_width, self.room_depth)

    def to_dict(self) -> dict[str, Any]:
        r = self.retrieval
        return {
            "scene_type": self.scene_type,
            "prompt": self.prompt,
            "room": [self.room_width, self.room_depth],
            "seed": self.seed,
            "category_set": self.category_set,
            "oracle": self.oracle,
            "retrieval": {"k": dict(r.k_per_path), "tau": r.tau, "baseline": r.baseline_mode,
                          "weights": asdict(r.weights)},
        }


@dataclass
class Generation:
    scene: PlacedScene
    failure: str | None = None
    timings: dict[str, float] = field(default_factory=dict)
    paths: KnowledgePaths | None = None
    retrieved: RetrievedSet | None = None
    tree: LayoutTree | None = None


@contextmanager
def _stage(name: str, timings: dict[str, float]) -> Iterator[None]:
    t0 = time.perf_counter()
    try:
        yield
    except ScenePathsError as exc:
        if getattr(exc, "stage", None) is None:
            exc.stage = name  # type: ignore[attr-defined]
        raise
    except Exception as exc:
        raise PipelineError(f"{name}: {exc}", stage=name) from exc
    finally:
        timings[name] = time.perf_counter() - t0


def generate(request: SceneRequest, catalog: Catalog, oracle: Oracle, *,
             categories: CategorySet | None = None, limits: Limits = Limits(),
             layout_params: LayoutParams = LayoutParams(), paths: KnowledgePaths | None = None) -> Generation:
    """Run every stage for one request.

    A run that retrieves no main object is not raised: it returns an empty
    scene with ``failure="no-root"`` so the audit is still available.
    A precomputed partition in ``paths`` skips the split stage.
    """
    if categories is None:
        try:
            categories = CATEGORY_SETS[request.category_set]
        except KeyError:
            raise InputError(f"unknown category set {request.category_set!r}") from None
    timings: dict[str, float] = {}
    gen = Generation(scene=None, timings=timings)  # type: ignore[arg-type]
    audit: dict[str, Any] = {}

    if paths is not None:
        if paths.scene_context.strip().lower() != request.scene_type.strip().lower():
            raise InputError(f"partition was built for {paths.scene_context!r}, not {request.scene_type!r}")
        missing = set(catalog.ids()) - {a for ids in paths.partition.values() for a in ids}
        if missing:
            raise InputError(f"partition does not cover {len(missing)} catalog asset(s), e.g. {sorted(missing)[0]!r}")
        gen.paths = paths
    else:
        with _stage("split", timings):
            gen.paths = split(catalog, categories, request.scene_type, oracle)
    audit["split"] = gen.paths.to_dict()
    with _stage("retrieve", timings):
        raw = retrieve(gen.paths, catalog, request, request.retrieval)
    with _stage("access_filter", timings):
        gen.retrieved = access_filter(raw, request.retrieval)
    audit["retrieval"] = gen.retrieved.to_dict()

    try:
        with _stage("organize", timings):
            gen.tree = organize(gen.retrieved, request.scene_type, oracle, catalog, limits)
    except NoRootError:
        gen.failure = "no-root"
        audit["failure"] = "no-root"
        audit["oracle"] = _oracle_audit(oracle)
        empty = LayoutTree([], {}, [], request.scene_type, {})
        gen.scene = PlacedScene(request.room, [], empty, request.to_dict(), audit)
        return gen
    audit["organize"] = gen.tree.notes

    with _stage("place", timings):
        scene = place(gen.tree, request.room, request.seed, catalog, layout_params)
    audit.update(scene.audit)
    audit["oracle"] = _oracle_audit(oracle)
    scene.request = request.to_dict()
    scene.audit = audit
    gen.scene = scene
    return gen


def _oracle_audit(oracle: Oracle) -> dict[str, Any]:
    out: dict[str, Any] = {"source": oracle.source, "calls": len(oracle.calls)}
    if hasattr(oracle, "fallbacks"):
        out["fallbacks"] = oracle.fallbacks
    return out
