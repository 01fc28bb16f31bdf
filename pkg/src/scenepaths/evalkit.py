"""Missing-object rates for generated scenes and batch comparisons."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from ._io import load_structured
from .errors import InputError
from .layout import PlacedScene
from .oracle import OracleQuery
from .oracle.base import Oracle

TagSet = frozenset[str]


def _tagset(v: Any) -> TagSet:
    if isinstance(v, str):
        v = [v]
    return frozenset(str(t).strip().lower() for t in v)


def _norm(scene_type: str) -> str:
    return scene_type.strip().lower()


@dataclass(frozen=True)
class SceneSpec:
    scene_type: str
    required_mains: tuple[TagSet, ...]
    required_pairs: tuple[tuple[TagSet, TagSet], ...] = ()

    def __post_init__(self):
        if not self.required_mains:
            raise InputError(f"spec for {self.scene_type!r} needs at least one required main")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SceneSpec":
        return cls(
            _norm(d["scene_type"]),
            tuple(_tagset(m) for m in d.get("required_mains") or []),
            tuple((_tagset(a), _tagset(b)) for a, b in d.get("required_pairs") or []),
        )


def load_specs(path: str | Path) -> list[SceneSpec]:
    data = load_structured(path)
    if isinstance(data, dict):
        data = data.get("specs", [])
    if not isinstance(data, list) or not data:
        raise InputError(f"{path}: expected a non-empty list of scene specs")
    try:
        return [SceneSpec.from_dict(d) for d in data]
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: malformed scene spec: {exc}") from None


@dataclass(frozen=True)
class MissRecord:
    scene_type: str
    label: str
    mains_required: int
    mains_missing: int
    pairs_required: int
    pairs_missing: int
    missing: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "scene_type": self.scene_type, "label": self.label,
            "mains_required": self.mains_required, "mains_missing": self.mains_missing,
            "pairs_required": self.pairs_required, "pairs_missing": self.pairs_missing,
            "missing": list(self.missing),
        }


def _label(ts: TagSet) -> str:
    return "|".join(sorted(ts))


def check_scene(scene: PlacedScene, spec: SceneSpec, label: str | None = None) -> MissRecord:
    """Count required mains and pairs absent from the scene's placements.

    Presence is by tag: a requirement is met when any placement carries one
    of its tags. A pair is missing if either side is.
    """
    if _norm(scene.scene_type) != spec.scene_type:
        raise InputError(f"scene type {scene.scene_type!r} does not match spec {spec.scene_type!r}")
    tag_sets = [frozenset(p.tags) for p in scene.placements]

    def present(ts: TagSet) -> bool:
        return any(ts & tags for tags in tag_sets)

    missing = []
    mains_missing = 0
    for m in spec.required_mains:
        if not present(m):
            mains_missing += 1
            missing.append(f"main:{_label(m)}")
    pairs_missing = 0
    for a, b in spec.required_pairs:
        if not (present(a) and present(b)):
            pairs_missing += 1
            missing.append(f"pair:{_label(a)}+{_label(b)}")
    if label is None:
        label = f"{spec.scene_type}#{scene.request.get('seed', '')}"
    return MissRecord(spec.scene_type, label, len(spec.required_mains), mains_missing,
                      len(spec.required_pairs), pairs_missing, tuple(missing))


@dataclass(frozen=True)
class MissReport:
    main_missing_rate: float
    paired_missing_rate: float
    n_scenes: int
    records: tuple[MissRecord, ...]

    @classmethod
    def from_records(cls, records: Iterable[MissRecord]) -> "MissReport":
        records = tuple(sorted(records, key=lambda r: (r.scene_type, r.label, r.missing)))
        mr = sum(r.mains_required for r in records)
        pr = sum(r.pairs_required for r in records)
        main = sum(r.mains_missing for r in records) / mr if mr else 0.0
        paired = sum(r.pairs_missing for r in records) / pr if pr else 0.0
        return cls(main, paired, len(records), records)

    def to_dict(self) -> dict[str, Any]:
        return {
            "main_missing_rate": self.main_missing_rate,
            "paired_missing_rate": self.paired_missing_rate,
            "n_scenes": self.n_scenes,
            "scenes": [r.to_dict() for r in self.records],
        }


@dataclass(frozen=True)
class Comparison:
    a: MissReport
    b: MissReport

    @property
    def n_scenes(self) -> int:
        return self.a.n_scenes

    @property
    def main_delta(self) -> float:
        """Reduction in main missing rate from batch a to batch b."""
        return self.a.main_missing_rate - self.b.main_missing_rate

    @property
    def paired_delta(self) -> float:
        return self.a.paired_missing_rate - self.b.paired_missing_rate

    def to_dict(self, names: tuple[str, str] = ("a", "b")) -> dict[str, Any]:
        return {
            names[0]: self.a.to_dict(),
            names[1]: self.b.to_dict(),
            "delta": {"main": self.main_delta, "paired": self.paired_delta},
            "n_scenes": self.n_scenes,
        }


def _spec_index(specs: Iterable[SceneSpec] | Mapping[str, SceneSpec]) -> dict[str, SceneSpec]:
    if isinstance(specs, Mapping):
        return {_norm(k): v for k, v in specs.items()}
    return {s.scene_type: s for s in specs}


def report(batch: Sequence[PlacedScene], specs) -> MissReport:
    index = _spec_index(specs)
    records = []
    for scene in batch:
        st = _norm(scene.scene_type)
        if st not in index:
            raise InputError(f"no spec for scene type {scene.scene_type!r}")
        records.append(check_scene(scene, index[st]))
    return MissReport.from_records(records)


def compare(batch_a: Sequence[PlacedScene], batch_b: Sequence[PlacedScene], specs) -> Comparison:
    if not batch_a or not batch_b:
        raise InputError("compare needs non-empty batches")
    if len(batch_a) != len(batch_b):
        raise InputError(f"batch sizes differ: {len(batch_a)} vs {len(batch_b)}")
    types_a = sorted(_norm(s.scene_type) for s in batch_a)
    types_b = sorted(_norm(s.scene_type) for s in batch_b)
    if types_a != types_b:
        raise InputError("batches were not generated from the same scene requests")
    return Comparison(report(batch_a, specs), report(batch_b, specs))


def prompt_text(scene_type: str) -> str:
    if not scene_type or not scene_type.strip():
        raise InputError("prompt_text: empty scene type")
    return f"a top-down view of {scene_type}"


def summary_table(comparison: Comparison, names: tuple[str, str] = ("baseline", "multi-path")) -> str:
    rows = [
        ("", names[0], names[1], "reduction"),
        ("main missing", f"{comparison.a.main_missing_rate:.2%}", f"{comparison.b.main_missing_rate:.2%}",
         f"{comparison.main_delta:+.2%}"),
        ("paired missing", f"{comparison.a.paired_missing_rate:.2%}", f"{comparison.b.paired_missing_rate:.2%}",
         f"{comparison.paired_delta:+.2%}"),
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.append(f"scenes per batch: {comparison.n_scenes}")
    return "\n".join(lines)


class RemoteEvaluator:
    """Asks a remote judge to rate four rotated top-down views of a scene."""

    def __init__(self, oracle: Oracle, scale: tuple[float, float] = (1.0, 5.0)):
        self.oracle = oracle
        self.scale = scale

    def score(self, scene: PlacedScene) -> float:
        from .render import render_views

        query = OracleQuery(
            "score", scene.scene_type,
            {"prompt": prompt_text(scene.scene_type), "views": render_views(scene), "scale": list(self.scale)},
            budget_id=f"evaluate:{scene.scene_type}:{scene.request.get('seed', '')}",
        )
        return float(self.oracle.ask(query).answer["score"])
