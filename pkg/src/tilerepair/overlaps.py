"""Assignment of uniquely owned pieces and of overlaps, by overlap order."""
from __future__ import annotations

from collections import deque
from typing import Mapping

from shapely.geometry.base import BaseGeometry

from .faces import Subdivision


def shared_perimeter(a: BaseGeometry, b: BaseGeometry) -> float:
    """Length of the common boundary of two polygonal geometries."""
    return a.boundary.intersection(b.boundary).length


def assign_order1(sub: Subdivision) -> int:
    """Give each order-1 piece to its single owner; returns the count."""
    count = 0
    for fid in sub.faces():
        s = sub.owner_set[fid]
        if len(s) == 1 and sub.owner[fid] is None:
            sub.set_owner(fid, next(iter(s)))
            count += 1
    return count


def _restore_chain(sub: Subdivision, unit: int, candidates: set[int]) -> list[int] | None:
    """Shortest chain of candidate pieces joining two components of a unit."""
    comps = sub.unit_components(unit)
    if len(comps) < 2:
        return None
    comp_of = {f: k for k, c in enumerate(comps) for f in c}
    for k, comp in enumerate(comps):
        parent: dict[int, int | None] = {}
        queue: deque[int] = deque()
        for f in sorted(comp):
            for e in sub.edges(f):
                g = sub.face_across(e)
                if g in candidates and g not in parent:
                    parent[g] = None
                    queue.append(g)
        while queue:
            f = queue.popleft()
            for e in sub.edges(f):
                g = sub.face_across(e)
                if g is None:
                    continue
                if sub.owner[g] == unit and comp_of.get(g, k) != k:
                    chain = [f]
                    while parent[chain[-1]] is not None:
                        chain.append(parent[chain[-1]])
                    return chain
                if g in candidates and g not in parent:
                    parent[g] = f
                    queue.append(g)
    return None


def assign_overlaps(
    sub: Subdivision,
    target_components: Mapping[int, int],
) -> dict:
    """Assign every order >= 2 piece, lowest order first.

    For each order, pieces that reconnect a currently disconnected unit (and
    contain it) go to that unit first; the rest go to the owner sharing the
    most boundary with them, ties broken by the lowest unit index.
    """
    stats = {"restored": 0, "by_perimeter": 0, "zero_perimeter": 0}
    pending = [f for f in sub.faces() if sub.owner[f] is None and len(sub.owner_set[f]) >= 2]
    if not pending:
        return stats
    orders = sorted({len(sub.owner_set[f]) for f in pending})
    units = sorted(sub.unit_faces)

    def disconnected() -> list[int]:
        return [u for u in units if len(sub.unit_components(u)) > target_components.get(u, 1)]

    for d in orders:
        batch = [f for f in pending if len(sub.owner_set[f]) == d and sub.owner[f] is None]
        for u in disconnected():
            while True:
                cands = {f for f in batch if sub.owner[f] is None and u in sub.owner_set[f]}
                if not cands:
                    break
                chain = _restore_chain(sub, u, cands)
                if chain is None:
                    break
                for f in chain:
                    sub.set_owner(f, u)
                    stats["restored"] += 1
                if len(sub.unit_components(u)) <= target_components.get(u, 1):
                    break
        left = [f for f in batch if sub.owner[f] is None]
        while left:
            deferred = []
            for f in left:
                best, best_len = None, 0.0
                for u in sorted(sub.owner_set[f]):
                    length = sub.shared_with_unit(f, u)
                    if length > best_len:
                        best, best_len = u, length
                if best is None:
                    deferred.append(f)
                else:
                    sub.set_owner(f, best)
                    stats["by_perimeter"] += 1
            if len(deferred) == len(left):
                for f in deferred:
                    sub.set_owner(f, min(sub.owner_set[f]))
                    stats["zero_perimeter"] += 1
                break
            left = deferred
    return stats
