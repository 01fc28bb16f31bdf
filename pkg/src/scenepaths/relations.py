"""Value domains of the four per-edge spatial relations."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any

RELATIONS = ("side", "orientation", "distance", "support")
SIDES = ("left", "right")
ORIENTATIONS = tuple(range(0, 360, 45))  # yaw offset from the parent's facing, CCW degrees
DISTANCES = ("near", "medium", "far")
FACING_PARENT = "facing-parent"


def facing_parent_offset(side: str) -> int:
    """Yaw offset that turns a child on ``side`` of its parent toward the parent."""
    return 270 if side == "left" else 90


def coerce_value(relation: str, value: Any) -> Any:
    """Normalize one relation answer; raises ValueError when out of domain."""
    if relation == "side":
        if isinstance(value, str) and value.strip().lower() in SIDES:
            return value.strip().lower()
    elif relation == "orientation":
        if isinstance(value, str) and value.strip().lower() == FACING_PARENT:
            return FACING_PARENT
        if isinstance(value, bool):
            raise ValueError(f"orientation: bad value {value!r}")
        try:
            deg = int(value)
        except (TypeError, ValueError):
            raise ValueError(f"orientation: bad value {value!r}") from None
        if deg == value or str(deg) == str(value).strip():
            deg %= 360
            if deg in ORIENTATIONS:
                return deg
    elif relation == "distance":
        if isinstance(value, str) and value.strip().lower() in DISTANCES:
            return value.strip().lower()
    elif relation == "support":
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.strip().lower() in ("true", "false"):
            return value.strip().lower() == "true"
    else:
        raise ValueError(f"unknown relation {relation!r}")
    raise ValueError(f"{relation}: bad value {value!r}")


@dataclass(frozen=True)
class RelationBundle:
    side: str = "right"
    orientation: int = 90
    distance: str = "near"
    support: bool = False

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        if self.distance not in DISTANCES:
            raise ValueError(f"distance must be one of {DISTANCES}")
        if self.support and self.distance == "far":
            raise ValueError("support forbids distance 'far'")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RelationBundle":
        return cls(d["side"], int(d["orientation"]), d["distance"], bool(d["support"]))


DEFAULT_BUNDLE = RelationBundle()
