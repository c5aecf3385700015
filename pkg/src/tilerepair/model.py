"""Plain data types passed between the repair stages."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

from shapely.geometry.base import BaseGeometry

from .geometry import Coord

UnitId = Hashable


class _Exterior:
    """Owner tag for gap boundary arcs that border no unit of the region."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "EXTERIOR"

    def __reduce__(self):
        return (_Exterior, ())


EXTERIOR = _Exterior()


@dataclass
class Unit:
    id: UnitId
    geometry: BaseGeometry
    attributes: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SubBoundary:
    """A maximal arc of a gap ring bordered by one owner.

    ``start`` and ``end`` index the gap ring; the arc runs forward
    (counter-clockwise) from ``start`` to ``end``.
    """

    start: int
    end: int
    owner: Any

    @property
    def is_exterior(self) -> bool:
        return self.owner is EXTERIOR


@dataclass(frozen=True)
class Gap:
    ring: tuple[Coord, ...]
    subs: tuple[SubBoundary, ...]
    holes: int = 0

    def arc(self, k: int) -> list[Coord]:
        s = self.subs[k]
        n = len(self.ring)
        out = [self.ring[s.start]]
        i = s.start
        while True:
            i = (i + 1) % n
            out.append(self.ring[i])
            if i == s.end:
                break
        return out


def sort_key(uid: UnitId) -> tuple:
    """Total order over mixed unit ids: numbers first, then strings."""
    if isinstance(uid, bool):
        return (1, str(uid))
    if isinstance(uid, (int, float)):
        return (0, uid, "")
    return (1, str(uid))


def sorted_ids(ids: Sequence[UnitId]) -> list[UnitId]:
    return sorted(ids, key=sort_key)
