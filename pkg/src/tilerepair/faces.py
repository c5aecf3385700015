"""Mutable planar subdivision that the repair stages edit in place.

Faces keep exact coordinates.  Every directed boundary edge maps to the
face on its left, so the face across an edge is a dictionary lookup and
unit membership, shared perimeter and connectivity are exact.
"""
from __future__ import annotations

import math
from typing import Iterable, Sequence

from shapely.geometry import Polygon

from .geometry import Coord, signed_area

Edge = tuple[Coord, Coord]


def _ring_edges(ring: Sequence[Coord]) -> Iterable[Edge]:
    n = len(ring)
    for i in range(n):
        yield ring[i], ring[(i + 1) % n]


class Subdivision:
    def __init__(self) -> None:
        self.rings: dict[int, tuple[Coord, ...]] = {}
        self.holes: dict[int, tuple[tuple[Coord, ...], ...]] = {}
        self.owner: dict[int, int | None] = {}
        self.owner_set: dict[int, frozenset[int]] = {}
        self.region: dict[int, int | None] = {}
        self.area: dict[int, float] = {}
        self.edge_face: dict[Edge, int] = {}
        self.unit_faces: dict[int, set[int]] = {}
        self._next = 0

    # -- construction -----------------------------------------------------

    def add(
        self,
        ring: Sequence[Coord],
        holes: Sequence[Sequence[Coord]] = (),
        owner: int | None = None,
        owner_set: frozenset[int] = frozenset(),
        region: int | None = None,
    ) -> int:
        ring = tuple(ring)
        if signed_area(ring) < 0:
            ring = ring[::-1]
        hs = []
        for h in holes:
            h = tuple(h)
            if signed_area(h) > 0:
                h = h[::-1]
            hs.append(h)
        fid = self._next
        self._next += 1
        self.rings[fid] = ring
        self.holes[fid] = tuple(hs)
        self.owner_set[fid] = owner_set
        self.region[fid] = region
        self.area[fid] = signed_area(ring) + sum(signed_area(h) for h in hs)
        for r in (ring, *hs):
            for e in _ring_edges(r):
                self.edge_face[e] = fid
        self.owner[fid] = None
        if owner is not None:
            self.set_owner(fid, owner)
        return fid

    def remove(self, fid: int) -> None:
        for r in (self.rings[fid], *self.holes[fid]):
            for e in _ring_edges(r):
                if self.edge_face.get(e) == fid:
                    del self.edge_face[e]
        own = self.owner[fid]
        if own is not None:
            self.unit_faces[own].discard(fid)
        for d in (self.rings, self.holes, self.owner, self.owner_set, self.region, self.area):
            del d[fid]

    def set_owner(self, fid: int, owner: int | None) -> None:
        old = self.owner[fid]
        if old is not None:
            self.unit_faces[old].discard(fid)
        self.owner[fid] = owner
        if owner is not None:
            self.unit_faces.setdefault(owner, set()).add(fid)

    # -- queries ------------------------------------------------------------

    def edges(self, fid: int) -> Iterable[Edge]:
        for r in (self.rings[fid], *self.holes[fid]):
            yield from _ring_edges(r)

    def face_across(self, edge: Edge) -> int | None:
        return self.edge_face.get((edge[1], edge[0]))

    def neighbour_lengths(self, fid: int) -> dict[int | None, float]:
        """Boundary length shared with each neighbouring face (None = outside)."""
        out: dict[int | None, list[float]] = {}
        for e in self.edges(fid):
            out.setdefault(self.face_across(e), []).append(math.dist(*e))
        return {k: math.fsum(v) for k, v in out.items()}

    def shared_with_unit(self, fid: int, unit: int) -> float:
        total = []
        for e in self.edges(fid):
            g = self.face_across(e)
            if g is not None and self.owner[g] == unit:
                total.append(math.dist(*e))
        return math.fsum(total)

    def unit_components(self, unit: int, faces: Iterable[int] | None = None) -> list[set[int]]:
        """Edge-connected components of a unit's faces."""
        members = set(self.unit_faces.get(unit, ())) if faces is None else set(faces)
        comps: list[set[int]] = []
        seen: set[int] = set()
        for start in sorted(members):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            seen.add(start)
            while stack:
                f = stack.pop()
                for e in self.edges(f):
                    g = self.face_across(e)
                    if g is not None and g in members and g not in seen:
                        seen.add(g)
                        comp.add(g)
                        stack.append(g)
            comps.append(comp)
        return comps

    def unit_area(self, unit: int) -> float:
        return math.fsum(self.area[f] for f in self.unit_faces.get(unit, ()))

    def polygon(self, fid: int) -> Polygon:
        return Polygon(self.rings[fid], self.holes[fid])

    def faces(self) -> list[int]:
        return sorted(self.rings)
