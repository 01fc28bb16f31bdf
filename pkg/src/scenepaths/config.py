"""Experiment manifest: one file naming inputs, retrieval knobs, room and oracle."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import httpx

from ._io import load_structured
from .catalog import SimilarityWeights
from .errors import ConfigError, InputError
from .layout import DISTANCE_TARGETS, LayoutParams
from .oracle import Oracle, RemoteOracle, RuleBook, RuleOracle
from .organizer import Limits
from .pipeline import SceneRequest
from .retriever import DEFAULT_K, RetrievalConfig
from .splitter import CATEGORY_SETS, CategorySet

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_CONFIG = DATA_DIR / "config.yaml"


@dataclass
class Settings:
    catalog: Path
    rulebook: Path
    categories: CategorySet
    category_set: str = "residential"
    seed: int = 0
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    room: tuple[float, float] = (7.0, 5.0)
    limits: Limits = field(default_factory=Limits)
    layout: LayoutParams = field(default_factory=LayoutParams)
    oracle: dict[str, Any] = field(default_factory=lambda: {"kind": "rule"})

    def request(self, scene_type: str, seed: int | None = None, **overrides: Any) -> SceneRequest:
        return SceneRequest(
            scene_type=scene_type,
            room_width=self.room[0],
            room_depth=self.room[1],
            seed=self.seed if seed is None else seed,
            retrieval=replace(self.retrieval, seed=self.seed if seed is None else seed),
            category_set=self.category_set,
            oracle=self.oracle.get("kind", "rule"),
            **overrides,
        )


def _resolve(base: Path, value: Any, what: str) -> Path:
    if not value:
        raise ConfigError(f"config needs '{what}'")
    p = Path(value)
    return p if p.is_absolute() else (base / p).resolve()


def load_settings(path: str | Path | None = None) -> Settings:
    path = Path(path) if path else DEFAULT_CONFIG
    try:
        data = load_structured(path) or {}
    except InputError as exc:
        raise ConfigError(str(exc)) from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be an object")
    base = path.resolve().parent
    try:
        cats = data.get("categories", "residential")
        if isinstance(cats, str):
            if cats not in CATEGORY_SETS:
                raise ConfigError(f"unknown category set {cats!r}; known: {', '.join(CATEGORY_SETS)}")
            cat_name, categories = cats, CATEGORY_SETS[cats]
        else:
            cat_name, categories = "custom", CategorySet.from_mapping(cats)
        r = data.get("retrieval") or {}
        sim = data.get("similarity") or {}
        retrieval = RetrievalConfig(
            k_per_path=dict(r.get("k") or (DEFAULT_K if cat_name == "residential" else {})),
            tau=float(r.get("tau", 0.2)),
            default_k=int(r.get("default_k", 4)),
            seed=int(data.get("seed", 0)),
            weights=SimilarityWeights(float(sim.get("lexical", 1.0)), float(sim.get("feature", 0.0))),
        )
        room = data.get("room") or {}
        lim = data.get("limits") or {}
        lay = data.get("layout") or {}
        return Settings(
            catalog=_resolve(base, data.get("catalog"), "catalog"),
            rulebook=_resolve(base, data.get("rulebook"), "rulebook"),
            categories=categories,
            category_set=cat_name,
            seed=int(data.get("seed", 0)),
            retrieval=retrieval,
            room=(float(room.get("width", 7.0)), float(room.get("depth", 5.0))),
            limits=Limits(int(lim.get("max_depth", 3)), int(lim.get("max_children", 6)), int(lim.get("max_rounds", 4))),
            layout=LayoutParams(
                distances={**DISTANCE_TARGETS, **(lay.get("distances") or {})},
                gap_tolerance=float(lay.get("gap_tolerance", 0.25)),
                attempts=int(lay.get("attempts", 50)),
            ),
            oracle=dict(data.get("oracle") or {"kind": "rule"}),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError, InputError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def build_oracle(settings: Settings, rulebook: RuleBook | None, seed: int,
                 transport: httpx.BaseTransport | None = None) -> Oracle:
    kind = settings.oracle.get("kind", "rule")
    if kind == "rule":
        if rulebook is None:
            raise ConfigError("rule oracle needs a rulebook")
        return RuleOracle(rulebook, seed=seed)
    if kind == "remote":
        return RemoteOracle(
            settings.oracle.get("endpoint") or "",
            token_env=settings.oracle.get("token_env", "SCENEPATHS_ORACLE_TOKEN"),
            timeout=float(settings.oracle.get("timeout", 60)),
            max_in_flight=int(settings.oracle.get("max_in_flight", 4)),
            transport=transport,
        )
    raise ConfigError(f"unknown oracle kind {kind!r}")
