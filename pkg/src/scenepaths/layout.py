"""Metric placement of layout forests inside a rectangular room.

Conventions: room origin at a corner, x along width, y along depth. Yaw is in
degrees CCW, yaw 0 faces +x. An asset's width lies across its facing
direction and its depth along it. Footprints are axis-aligned boxes around
the rotated rectangle; gaps are edge-to-edge distances between those boxes.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping

from .catalog import Catalog
from .errors import InputError, RoomTooSmallError
from .organizer import Edge, LayoutTree
from .relations import RelationBundle

EPS = 1e-9
DISTANCE_TARGETS = {"near": 0.5, "medium": 1.5, "far": 3.0}


def distance_target(d: str, table: Mapping[str, float] | None = None, support: bool = False) -> float:
    """Edge-to-edge gap in meters for a distance label; contact when supported."""
    if support:
        return 0.0
    table = DISTANCE_TARGETS if table is None else table
    try:
        return float(table[d])
    except KeyError:
        raise InputError(f"unknown distance label {d!r}") from None


@dataclass(frozen=True)
class LayoutParams:
    distances: Mapping[str, float] = field(default_factory=lambda: dict(DISTANCE_TARGETS))
    gap_tolerance: float = 0.25
    attempts: int = 50
    child_step: float = 0.1
    root_step: float = 0.3


@dataclass(frozen=True)
class Room:
    width: float
    depth: float

    def __post_init__(self):
        if not (self.width > 0 and self.depth > 0):
            raise InputError("room width and depth must be > 0")

    @property
    def center(self) -> tuple[float, float]:
        return self.width / 2, self.depth / 2


BBox = tuple[float, float, float, float]  # xmin, ymin, xmax, ymax


def half_extents(w: float, d: float, yaw: float) -> tuple[float, float]:
    t = math.radians(yaw)
    c, s = abs(math.cos(t)), abs(math.sin(t))
    return w / 2 * s + d / 2 * c, w / 2 * c + d / 2 * s


def left_of(yaw: float) -> tuple[float, float]:
    t = math.radians(yaw)
    return -math.sin(t), math.cos(t)


@dataclass(frozen=True)
class Placement:
    asset_id: str
    name: str
    tags: tuple[str, ...]
    dims: tuple[float, float, float]
    x: float
    y: float
    z: float
    yaw: int
    supported_by: str | None = None

    @property
    def bbox(self) -> BBox:
        ex, ey = half_extents(self.dims[0], self.dims[1], self.yaw)
        return self.x - ex, self.y - ey, self.x + ex, self.y + ey

    @property
    def top(self) -> float:
        return self.z + self.dims[2]

    def to_dict(self) -> dict[str, Any]:
        return {
            "asset_id": self.asset_id, "name": self.name, "tags": list(self.tags), "dims": list(self.dims),
            "position": [self.x, self.y, self.z], "yaw": self.yaw, "supported_by": self.supported_by,
            "bbox": list(self.bbox),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "Placement":
        x, y, z = d["position"]
        return cls(d["asset_id"], d.get("name", d["asset_id"]), tuple(d.get("tags", ())), tuple(d["dims"]),
                   float(x), float(y), float(z), int(d["yaw"]), d.get("supported_by"))


@dataclass
class PlacedScene:
    room: Room
    placements: list[Placement]
    tree: LayoutTree
    request: dict[str, Any] = field(default_factory=dict)
    audit: dict[str, Any] = field(default_factory=dict)

    @property
    def scene_type(self) -> str:
        return self.tree.scene_type

    def by_id(self) -> dict[str, Placement]:
        return {p.asset_id: p for p in self.placements}

    def to_dict(self) -> dict[str, Any]:
        return {
            "room": {"width": self.room.width, "depth": self.room.depth},
            "placements": [p.to_dict() for p in self.placements],
            "tree": self.tree.to_dict(),
            "request": self.request,
            "audit": self.audit,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "PlacedScene":
        return cls(Room(d["room"]["width"], d["room"]["depth"]),
                   [Placement.from_dict(p) for p in d["placements"]],
                   LayoutTree.from_dict(d["tree"]), dict(d.get("request", {})), dict(d.get("audit", {})))


# --------------------------------------------------------------------------
# geometry predicates


def overlaps(a: BBox, b: BBox) -> bool:
    return a[0] < b[2] - EPS and b[0] < a[2] - EPS and a[1] < b[3] - EPS and b[1] < a[3] - EPS


def inside(inner: BBox, outer: BBox) -> bool:
    return (inner[0] >= outer[0] - EPS and inner[1] >= outer[1] - EPS
            and inner[2] <= outer[2] + EPS and inner[3] <= outer[3] + EPS)


def separation(a: BBox, b: BBox) -> float:
    """Edge-to-edge distance; negative penetration depth when overlapping."""
    dx = max(a[0] - b[2], b[0] - a[2])
    dy = max(a[1] - b[3], b[1] - a[3])
    if dx <= 0 and dy <= 0:
        return max(dx, dy)
    return math.hypot(max(dx, 0.0), max(dy, 0.0))


def room_box(room: Room) -> BBox:
    return 0.0, 0.0, room.width, room.depth


def edge_violations(parent: Placement, child: Placement, rel: RelationBundle,
                    params: LayoutParams = LayoutParams()) -> list[tuple[str, str]]:
    """How ``child`` breaks its relation to ``parent``, as (kind, detail) pairs."""
    out = []
    if (child.yaw - parent.yaw - rel.orientation) % 360 != 0:
        out.append(("relation", f"yaw offset {(child.yaw - parent.yaw) % 360} != {rel.orientation}"))
    if rel.support:
        if not math.isclose(child.z, parent.top, abs_tol=EPS):
            out.append(("support-height", f"z {child.z} != supporter top {parent.top}"))
        if not inside(child.bbox, parent.bbox):
            out.append(("relation", "footprint leaves the supporter"))
        if child.supported_by != parent.asset_id:
            out.append(("relation", f"supported_by {child.supported_by!r} != {parent.asset_id!r}"))
        return out
    lx, ly = left_of(parent.yaw)
    lateral = (child.x - parent.x) * lx + (child.y - parent.y) * ly
    if rel.side == "left" and lateral <= EPS or rel.side == "right" and lateral >= -EPS:
        out.append(("relation", f"lateral offset {lateral:+.3f} on wrong side for {rel.side}"))
    target = distance_target(rel.distance, params.distances)
    gap = separation(parent.bbox, child.bbox)
    if abs(gap - target) > params.gap_tolerance + EPS:
        out.append(("relation", f"gap {gap:.3f} outside {target}±{params.gap_tolerance}"))
    return out


# --------------------------------------------------------------------------
# solver


def _spiral(cx: float, cy: float, step: float, phase: float, attempts: int) -> Iterator[tuple[float, float]]:
    yield cx, cy
    for i in range(1, attempts):
        ring, j = (i - 1) // 8 + 1, (i - 1) % 8
        a = math.radians(phase + 45 * j)
        yield cx + ring * step * math.cos(a), cy + ring * step * math.sin(a)


def _offset_for_gap(parent: BBox, px: float, py: float, ex: float, ey: float,
                    ux: float, uy: float, gap: float) -> float:
    def sep(s: float) -> float:
        x, y = px + s * ux, py + s * uy
        return separation(parent, (x - ex, y - ey, x + ex, y + ey))

    hi = (parent[2] - parent[0]) + (parent[3] - parent[1]) + 2 * (ex + ey) + gap + 1.0
    while sep(hi) < gap:
        hi *= 2
    lo = 0.0
    for _ in range(100):
        mid = (lo + hi) / 2
        if sep(mid) < gap:
            lo = mid
        else:
            hi = mid
    return hi


def _beside(parent: Placement, asset, yaw: int, rel: RelationBundle, params: LayoutParams,
            phase: float) -> Iterator[tuple[float, float]]:
    """Ground candidates on the requested side of ``parent`` at the target gap.

    The child slides along the parent's facing axis; at each slide the lateral
    offset is re-solved so the gap stays on target. A small spiral around the
    nominal spot follows as a last resort.
    """
    ex, ey = half_extents(asset.width, asset.depth, yaw)
    lx, ly = left_of(parent.yaw)
    sign = 1.0 if rel.side == "left" else -1.0
    ux, uy = sign * lx, sign * ly
    fx, fy = math.cos(math.radians(parent.yaw)), math.sin(math.radians(parent.yaw))
    gap = distance_target(rel.distance, params.distances)
    first = 1.0 if phase < 180 else -1.0
    slides = [0.0]
    for i in range(1, params.attempts):
        t = (i + 1) // 2 * params.child_step
        slides.append(first * t if i % 2 else -first * t)
    nominal = None
    for t in slides:
        bx, by = parent.x + t * fx, parent.y + t * fy
        # keep clear of the parent's axis so the side stays unambiguous
        s = max(_offset_for_gap(parent.bbox, bx, by, ex, ey, ux, uy, gap), params.child_step)
        if nominal is None:
            nominal = (bx + s * ux, by + s * uy)
        yield bx + s * ux, by + s * uy
    yield from _spiral(nominal[0], nominal[1], params.child_step, phase, params.attempts)


def _fits(dims, room: Room) -> bool:
    w, d = dims[0], dims[1]
    return (w <= room.width and d <= room.depth) or (d <= room.width and w <= room.depth)


def place(tree: LayoutTree, room: Room, seed: int, catalog: Catalog,
          params: LayoutParams = LayoutParams()) -> PlacedScene:
    """Roots first along the longest wall, then children breadth-first.

    Objects with no admissible candidate after ``params.attempts`` tries are
    dropped together with their subtrees and listed in the audit.
    """
    for r in tree.roots:
        if not _fits(catalog[tree.nodes[r]].dims, room):
            raise RoomTooSmallError(f"room-too-small: {tree.nodes[r]!r} does not fit in {room.width}x{room.depth}")

    rbox = room_box(room)
    placed: dict[str, Placement] = {}
    ground: list[Placement] = []
    stacked: dict[str, list[Placement]] = {}
    dropped: list[dict[str, str]] = []

    def phase(node: str) -> float:
        return 45.0 * random.Random(f"{seed}:{node}").randrange(8)

    def make(node: str, x: float, y: float, z: float, yaw: int, sup: str | None) -> Placement:
        a = catalog[tree.nodes[node]]
        return Placement(a.id, a.name, tuple(sorted(a.tags)), a.dims, x, y, z, yaw, sup)

    def clear(pl: Placement, level: list[Placement]) -> bool:
        box = pl.bbox
        return inside(box, rbox) and not any(overlaps(box, o.bbox) for o in level)

    # roots: spread along the longest wall, backs to the wall, facing into the room
    along_x = room.width >= room.depth
    n = len(tree.roots)
    yaw = 90 if along_x else 0
    for i, r in enumerate(tree.roots):
        a = catalog[tree.nodes[r]]
        frac = (i + 1) / (n + 1)
        ex, ey = half_extents(a.width, a.depth, yaw)
        if along_x:
            nx, ny = min(max(room.width * frac, ex), room.width - ex), ey
        else:
            nx, ny = ex, min(max(room.depth * frac, ey), room.depth - ey)
        for x, y in _spiral(nx, ny, params.root_step, phase(r), params.attempts):
            pl = make(r, x, y, 0.0, yaw, None)
            if clear(pl, ground):
                placed[r] = pl
                ground.append(pl)
                break
        else:
            dropped.append({"node": r, "asset_id": a.id, "reason": "unplaceable"})

    # children, breadth-first
    edge_to = {e.child: e for e in tree.edges}
    for node in tree.bfs():
        if node in tree.roots:
            continue
        e: Edge = edge_to[node]
        asset = catalog[tree.nodes[node]]
        parent = placed.get(e.parent)
        if parent is None:
            dropped.append({"node": node, "asset_id": asset.id, "reason": "parent-dropped"})
            continue
        rel = e.relation
        yaw = (parent.yaw + rel.orientation) % 360
        if rel.support:
            z, sup, level = parent.top, parent.asset_id, stacked.setdefault(parent.asset_id, [])
            candidates = _spiral(parent.x, parent.y, params.child_step, phase(node), params.attempts)
        else:
            z, sup, level = 0.0, None, ground
            candidates = _beside(parent, asset, yaw, rel, params, phase(node))
        for x, y in candidates:
            pl = make(node, x, y, z, yaw, sup)
            if clear(pl, level) and not edge_violations(parent, pl, rel, params):
                placed[node] = pl
                level.append(pl)
                break
        else:
            dropped.append({"node": node, "asset_id": asset.id, "reason": "unplaceable"})

    gone = {d["node"] for d in dropped}
    kept = LayoutTree(
        [r for r in tree.roots if r not in gone],
        {k: v for k, v in tree.nodes.items() if k not in gone},
        [e for e in tree.edges if e.child not in gone and e.parent not in gone],
        tree.scene_type,
        dict(tree.notes),
    )
    order = [n for n in tree.bfs() if n in placed]
    audit = {"seed": seed, "dropped": dropped}
    return PlacedScene(room, [placed[n] for n in order], kept, {}, {"layout": audit})


# --------------------------------------------------------------------------
# checker


@dataclass(frozen=True)
class Violation:
    kind: str
    ids: tuple[str, ...]
    detail: str = ""


def validate(scene: PlacedScene, params: LayoutParams = LayoutParams()) -> list[Violation]:
    """Every broken placement invariant; an empty list means the scene is valid."""
    out: list[Violation] = []
    tree = scene.tree
    by_node = {}
    pl_by_id = scene.by_id()
    for node, aid in tree.nodes.items():
        if aid in pl_by_id:
            by_node[node] = pl_by_id[aid]
        else:
            out.append(Violation("tree", (node,), "tree node without placement"))
    extra = set(pl_by_id) - set(tree.nodes.values())
    for aid in sorted(extra):
        out.append(Violation("tree", (aid,), "placement without tree node"))

    rbox = room_box(scene.room)
    for p in scene.placements:
        if p.yaw % 45 or not 0 <= p.yaw < 360:
            out.append(Violation("yaw", (p.asset_id,), f"yaw {p.yaw} not a multiple of 45 in [0, 360)"))
        if not inside(p.bbox, rbox):
            out.append(Violation("out-of-bounds", (p.asset_id,), f"bbox {p.bbox} leaves the room"))

    supported = {e.child for e in tree.edges if e.relation.support}
    for node, p in by_node.items():
        if node not in supported and abs(p.z) > EPS:
            out.append(Violation("support-height", (p.asset_id,), f"unsupported object at z={p.z}"))

    for e in tree.edges:
        parent, child = by_node.get(e.parent), by_node.get(e.child)
        if parent is None or child is None:
            continue
        for kind, detail in edge_violations(parent, child, e.relation, params):
            out.append(Violation(kind, (parent.asset_id, child.asset_id), detail))

    levels: dict[str | None, list[Placement]] = {}
    for node, p in by_node.items():
        level = tree.parent_of(node) if node in supported else None
        levels.setdefault(level, []).append(p)
    for group in levels.values():
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if overlaps(a.bbox, b.bbox):
                    out.append(Violation("overlap", (a.asset_id, b.asset_id), "footprints overlap"))
    return out
