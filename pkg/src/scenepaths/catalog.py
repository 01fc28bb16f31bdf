"""Asset catalog: ingestion, serialization and lexical/feature similarity.

Line format, one record per line::

    id | name | tags | w,d,h | category_hint | feature

``tags`` are comma-separated, ``feature`` comma-separated reals; the last two
fields are optional. ``#`` lines are comments, except the directives
``# version: <v>`` and ``# feature_dim: <n>``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from ._io import load_structured
from .errors import CatalogError

_TOKEN = re.compile(r"[a-z0-9]+")
_DIRECTIVE = re.compile(r"^#\s*(version|feature_dim)\s*:\s*(\S+)\s*$")
NORM_TOL = 1e-6


def tokenize(text: str) -> list[str]:
    """Lowercase, split on non-alphanumeric runs. No stemming."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class Asset:
    id: str
    name: str
    tags: frozenset[str]
    dims: tuple[float, float, float]  # width, depth, height in meters
    feature: tuple[float, ...] | None = None
    category_hint: str | None = None

    @property
    def width(self) -> float:
        return self.dims[0]

    @property
    def depth(self) -> float:
        return self.dims[1]

    @property
    def height(self) -> float:
        return self.dims[2]

    @property
    def tokens(self) -> frozenset[str]:
        """Tags and name tokens, the lexical side of similarity."""
        out = set(tokenize(self.name))
        for t in self.tags:
            out.update(tokenize(t))
        return frozenset(out)

    def descriptor(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "tags": sorted(self.tags),
            "dims": list(self.dims),
            "category_hint": self.category_hint,
        }

    def to_dict(self) -> dict[str, Any]:
        d = self.descriptor()
        d["feature"] = list(self.feature) if self.feature is not None else None
        return d


@dataclass(frozen=True)
class Catalog:
    assets: tuple[Asset, ...] = ()
    feature_dim: int | None = None
    version: str = "1"
    _index: dict[str, Asset] = field(default=None, init=False, repr=False, compare=False)  # type: ignore[assignment]

    def __post_init__(self):
        index: dict[str, Asset] = {}
        for a in self.assets:
            if a.id in index:
                raise CatalogError(f"duplicate id {a.id!r}")
            index[a.id] = a
            if a.feature is not None and self.feature_dim is not None and len(a.feature) != self.feature_dim:
                raise CatalogError(f"asset {a.id!r}: feature has {len(a.feature)} dims, catalog declares {self.feature_dim}")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.assets)

    def __iter__(self) -> Iterator[Asset]:
        return iter(self.assets)

    def __contains__(self, asset_id: object) -> bool:
        return asset_id in self._index

    def __getitem__(self, asset_id: str) -> Asset:
        return self._index[asset_id]

    def ids(self) -> list[str]:
        return [a.id for a in self.assets]

    def to_dict(self) -> dict[str, Any]:
        return {
            "version": self.version,
            "feature_dim": self.feature_dim,
            "assets": [a.to_dict() for a in self.assets],
        }


# --------------------------------------------------------------------------
# ingestion


def _parse_reals(text: str, where: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise CatalogError(f"{where}: expected comma-separated reals, got {text!r}") from None
    if not all(math.isfinite(v) for v in vals):
        raise CatalogError(f"{where}: non-finite value in {text!r}")
    return vals


def _build_asset(rec: dict[str, Any], where: str) -> Asset:
    aid = str(rec.get("id") or "").strip()
    if not aid:
        raise CatalogError(f"{where}, field 'id': empty id")
    name = str(rec.get("name") or "").strip()
    if not name:
        raise CatalogError(f"{where}, field 'name': empty name")

    tags = rec.get("tags") or []
    if isinstance(tags, str):
        tags = tags.split(",")
    tags = frozenset(str(t).strip().lower() for t in tags if str(t).strip())
    if "|" in aid or "|" in name or any("|" in t or "," in t for t in tags):
        raise CatalogError(f"{where}, field 'id/name/tags': '|' and ',' are reserved separators")

    dims = rec.get("dims")
    if isinstance(dims, str):
        dims = _parse_reals(dims, f"{where}, field 'dims'")
    try:
        dims = tuple(float(v) for v in dims)  # type: ignore[union-attr]
    except (TypeError, ValueError):
        raise CatalogError(f"{where}, field 'dims': expected w,d,h") from None
    if len(dims) != 3:
        raise CatalogError(f"{where}, field 'dims': expected 3 values, got {len(dims)}")
    if not all(math.isfinite(v) and v > 0 for v in dims):
        raise CatalogError(f"{where}, field 'dims': all dimensions must be > 0")

    hint = rec.get("category_hint")
    hint = str(hint).strip().lower() if hint not in (None, "") else None

    feature = rec.get("feature")
    if isinstance(feature, str):
        feature = _parse_reals(feature, f"{where}, field 'feature'") if feature.strip() else None
    if feature is not None:
        try:
            feature = tuple(float(v) for v in feature)
        except (TypeError, ValueError):
            raise CatalogError(f"{where}, field 'feature': expected reals") from None
        if not feature:
            feature = None
    if feature is not None:
        norm = math.sqrt(sum(v * v for v in feature))
        if abs(norm - 1.0) > NORM_TOL:
            raise CatalogError(f"{where}, field 'feature': norm {norm:.9f} is not 1")

    return Asset(aid, name, tags, dims, feature, hint)  # type: ignore[arg-type]


def _assemble(records: Iterable[tuple[int, dict[str, Any]]], version: str, feature_dim: int | None,
              unit: str) -> Catalog:
    assets: list[Asset] = []
    seen: dict[str, int] = {}
    for loc, rec in records:
        where = f"{unit} {loc}"
        asset = _build_asset(rec, where)
        if asset.id in seen:
            raise CatalogError(f"duplicate id {asset.id!r} on {unit}s {seen[asset.id]}, {loc}")
        seen[asset.id] = loc
        if asset.feature is not None:
            if feature_dim is None:
                feature_dim = len(asset.feature)
            elif len(asset.feature) != feature_dim:
                raise CatalogError(
                    f"{where}, field 'feature': dimensionality {len(asset.feature)} != {feature_dim}"
                )
        assets.append(asset)
    return Catalog(tuple(assets), feature_dim, version)


def parse_lines(lines: Iterable[str]) -> Catalog:
    version = "1"
    feature_dim: int | None = None
    records: list[tuple[int, dict[str, Any]]] = []
    names = ("id", "name", "tags", "dims", "category_hint", "feature")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _DIRECTIVE.match(line)
            if m and m.group(1) == "version":
                version = m.group(2)
            elif m:
                try:
                    feature_dim = int(m.group(2))
                except ValueError:
                    raise CatalogError(f"line {lineno}, field 'feature_dim': not an integer") from None
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) < 4 or len(parts) > 6:
            raise CatalogError(f"line {lineno}, field 'record': expected 4-6 '|' separated fields, got {len(parts)}")
        records.append((lineno, dict(zip(names, parts))))
    return _assemble(records, version, feature_dim, "line")


def ingest(source: str | Path) -> Catalog:
    """Read a catalog file (line format, or ``.json``/``.yaml`` object variant)."""
    path = Path(source)
    if not path.is_file():
        raise CatalogError(f"{path}: no such catalog file")
    if path.suffix.lower() in (".json", ".yaml", ".yml"):
        data = load_structured(path)
        if data is None:
            return Catalog()
        if isinstance(data, list):
            data = {"assets": data}
        if not isinstance(data, dict) or not isinstance(data.get("assets", []), list):
            raise CatalogError(f"{path}: expected an object with an 'assets' list")
        fd = data.get("feature_dim")
        return _assemble(
            ((i, rec) for i, rec in enumerate(data.get("assets", []), start=1)),
            str(data.get("version", "1")),
            int(fd) if fd is not None else None,
            "record",
        )
    with path.open(encoding="utf-8") as fh:
        return parse_lines(fh)


def format_lines(catalog: Catalog) -> str:
    out = [f"# version: {catalog.version}"]
    if catalog.feature_dim is not None:
        out.append(f"# feature_dim: {catalog.feature_dim}")
    for a in catalog.assets:
        fields = [
            a.id,
            a.name,
            ",".join(sorted(a.tags)),
            ",".join(repr(v) for v in a.dims),
            a.category_hint or "",
            ",".join(repr(v) for v in a.feature) if a.feature is not None else "",
        ]
        out.append(" | ".join(fields).rstrip(" |"))
    return "\n".join(out) + "\n"


def write(catalog: Catalog, dest: str | Path) -> None:
    Path(dest).write_text(format_lines(catalog), encoding="utf-8")


# --------------------------------------------------------------------------
# similarity


@dataclass(frozen=True)
class SimilarityWeights:
    lexical: float = 1.0
    feature: float = 0.0


def jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    a, b = set(a), set(b)
    union = a | b
    return len(a & b) / len(union) if union else 0.0


def similarity(asset: Asset, query: str, query_vector: Sequence[float] | None = None,
               weights: SimilarityWeights = SimilarityWeights()) -> float:
    """Score in [0, 1] between an asset and query text.

    Jaccard between query tokens and asset tokens, blended with cosine
    similarity mapped to [0, 1] when both sides carry a vector and the
    feature weight is positive.
    """
    q_tokens = tokenize(query)
    if not q_tokens:
        raise CatalogError("similarity: empty query")
    lex = jaccard(q_tokens, asset.tokens)
    if query_vector is None or asset.feature is None or weights.feature <= 0:
        return lex
    if len(query_vector) != len(asset.feature):
        raise CatalogError(f"similarity: query vector has {len(query_vector)} dims, asset {len(asset.feature)}")
    qn = math.sqrt(sum(v * v for v in query_vector))
    cos = sum(a * b for a, b in zip(asset.feature, query_vector)) / qn if qn else 0.0
    feat = min(1.0, max(0.0, (cos + 1.0) / 2.0))
    total = weights.lexical + weights.feature
    return (weights.lexical * lex + weights.feature * feat) / total
