"""Build layout forests from retrieved assets by multi-round oracle queries."""

from __future__ import annotations

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Mapping

from .catalog import Asset, Catalog
from .errors import InputError, NoRootError, OracleError, PipelineError
from .oracle import Oracle, OracleQuery
from .relations import FACING_PARENT, RELATIONS, RelationBundle, facing_parent_offset
from .retriever import RetrievedSet

log = logging.getLogger(__name__)

RELATION_DEFAULTS = {"side": "right", "orientation": FACING_PARENT, "distance": "near", "support": False}


@dataclass(frozen=True)
class Limits:
    max_depth: int = 3
    max_children: int = 6
    max_rounds: int = 4

    def __post_init__(self):
        if min(self.max_depth, self.max_children, self.max_rounds) < 1:
            raise InputError("organizer caps must be positive")


@dataclass(frozen=True)
class Edge:
    parent: str
    child: str
    relation: RelationBundle


@dataclass
class LayoutTree:
    roots: list[str]
    nodes: dict[str, str]  # node id -> asset id
    edges: list[Edge]
    scene_type: str
    notes: dict[str, Any] = field(default_factory=dict)

    def parent_of(self, node: str) -> str | None:
        for e in self.edges:
            if e.child == node:
                return e.parent
        return None

    def children_of(self, node: str) -> list[Edge]:
        return [e for e in self.edges if e.parent == node]

    def depth(self, node: str) -> int:
        d, seen = 0, {node}
        p = self.parent_of(node)
        while p is not None:
            if p in seen:
                raise PipelineError(f"cycle through {p!r}", stage="organize")
            seen.add(p)
            d += 1
            p = self.parent_of(p)
        return d

    def bfs(self) -> list[str]:
        kids = defaultdict(list)
        for e in self.edges:
            kids[e.parent].append(e.child)
        order, queue = [], deque(self.roots)
        while queue:
            n = queue.popleft()
            order.append(n)
            queue.extend(kids[n])
        return order

    def problems(self) -> list[str]:
        """Forest invariant violations; empty when well-formed."""
        out = []
        parents: dict[str, list[str]] = defaultdict(list)
        for e in self.edges:
            parents[e.child].append(e.parent)
            if e.parent not in self.nodes or e.child not in self.nodes:
                out.append(f"edge {e.parent}->{e.child} references an unknown node")
        for n in self.nodes:
            if n in self.roots:
                if parents.get(n):
                    out.append(f"root {n} has a parent")
            elif len(parents.get(n, [])) != 1:
                out.append(f"node {n} has {len(parents.get(n, []))} parents")
        reach = self.bfs()
        if len(reach) != len(set(reach)) or set(reach) != set(self.nodes):
            out.append("nodes not reachable exactly once from the roots")
        return out

    def to_dict(self) -> dict[str, Any]:
        return {
            "scene_type": self.scene_type,
            "roots": list(self.roots),
            "nodes": dict(self.nodes),
            "edges": [{"parent": e.parent, "child": e.child, "relation": e.relation.to_dict()} for e in self.edges],
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "LayoutTree":
        edges = [Edge(e["parent"], e["child"], RelationBundle.from_dict(e["relation"])) for e in d["edges"]]
        return cls(list(d["roots"]), dict(d["nodes"]), edges, d["scene_type"], dict(d.get("notes", {})))


def relations_for_edge(parent: Asset, child: Asset, scene_type: str, oracle: Oracle) -> RelationBundle:
    """Four oracle queries, one per relation; a failed query takes the default."""
    if parent.id == child.id:
        raise InputError(f"relation of {parent.id!r} with itself")
    values = {}
    for rel in RELATIONS:
        query = OracleQuery(
            "relation", scene_type,
            {"parent": parent.descriptor(), "child": child.descriptor(), "relation": rel},
            budget_id=f"relation:{parent.id}:{child.id}:{rel}",
        )
        try:
            values[rel] = oracle.ask(query).answer["value"]
        except OracleError as exc:
            log.warning("relation %s for %s->%s fell back to default: %s", rel, parent.id, child.id, exc)
            values[rel] = RELATION_DEFAULTS[rel]
    orientation = values["orientation"]
    if orientation == FACING_PARENT:
        orientation = facing_parent_offset(values["side"])
    distance = values["distance"]
    if values["support"] and distance == "far":
        distance = "near"
    return RelationBundle(values["side"], orientation, distance, bool(values["support"]))


def organize(retrieved: RetrievedSet, scene_type: str, oracle: Oracle, catalog: Catalog,
             limits: Limits = Limits(), root_category: str = "main") -> LayoutTree:
    """One tree per retrieved main object, children found round by round.

    Assets left over when the caps are hit go to the tree with the fewest
    descendants (ties: first root), at its shallowest node with spare capacity.
    """
    if not retrieved.categories:
        raise NoRootError()
    if root_category not in retrieved.categories:
        root_category = next(iter(retrieved.categories))
    roots = retrieved.ids(root_category)
    if not roots:
        raise NoRootError()
    pending = [aid for c in retrieved.categories if c != root_category for aid in retrieved.ids(c)]

    kids: dict[str, list[str]] = defaultdict(list)
    depth = {r: 0 for r in roots}
    order: list[tuple[str, str]] = []
    failed_queries = 0

    def attach(p: str, c: str) -> None:
        kids[p].append(c)
        depth[c] = depth[p] + 1
        order.append((p, c))

    frontier = list(roots)
    rounds = 0
    while pending and frontier and rounds < limits.max_rounds:
        rounds += 1
        nxt = []
        for p in frontier:
            room = limits.max_children - len(kids[p])
            if depth[p] >= limits.max_depth or room <= 0 or not pending:
                continue
            query = OracleQuery(
                "children", scene_type,
                {"parent": catalog[p].descriptor(),
                 "candidates": [catalog[a].descriptor() for a in pending],
                 "max_children": room},
                budget_id=f"children:{p}:round{rounds}",
            )
            try:
                chosen = oracle.ask(query).answer["children"]
            except OracleError as exc:
                log.warning("children query for %s failed: %s", p, exc)
                failed_queries += 1
                chosen = []
            for c in chosen:
                attach(p, c)
                pending.remove(c)
                nxt.append(c)
        frontier = nxt

    orphans = list(pending)
    for c in orphans:
        attach(_orphan_slot(roots, kids, depth, limits), c)

    edges = [Edge(p, c, relations_for_edge(catalog[p], catalog[c], scene_type, oracle)) for p, c in order]
    nodes = {aid: aid for aid in roots}
    nodes.update({c: c for _, c in order})
    notes = {"rounds": rounds, "orphans": orphans, "failed_children_queries": failed_queries,
             "root_category": root_category}
    return LayoutTree(list(roots), nodes, edges, scene_type, notes)


def _orphan_slot(roots, kids, depth, limits: Limits) -> str:
    def size(r: str) -> int:
        n, stack = 0, list(kids[r])
        while stack:
            x = stack.pop()
            n += 1
            stack.extend(kids[x])
        return n

    for _, _, root in sorted((size(r), i, r) for i, r in enumerate(roots)):
        queue = deque([root])
        while queue:
            n = queue.popleft()
            if depth[n] < limits.max_depth and len(kids[n]) < limits.max_children:
                return n
            queue.extend(kids[n])
    raise PipelineError("layout forest is full; raise the depth or children caps", stage="organize")
