"""Post-processing: reattach tiny orphan components, rook-to-queen conversion."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
import shapely
from shapely.geometry import LineString, MultiLineString, Polygon
from shapely.geometry.base import BaseGeometry

from .arrangement import (
    compute_owner_sets,
    noded_union,
    piece_rings,
    polygonize,
    polygons_of,
    representative_points,
)
from .faces import Subdivision


@dataclass(frozen=True)
class OrphanPolicy:
    """Components smaller than ``ratio`` times the unit's largest one are moved."""

    ratio: float = 0.0001


def reconnect_in_subdivision(
    sub: Subdivision,
    targets: Mapping[int, int],
    policy: OrphanPolicy,
    units: Sequence[int],
) -> list[int]:
    """Hand small stray components to the neighbour sharing the most boundary.

    Returns the units that still have more components than ``targets``.
    """
    residual = []
    for u in units:
        while True:
            comps = sub.unit_components(u)
            if len(comps) <= targets.get(u, 1):
                break
            areas = [math.fsum(sub.area[f] for f in c) for c in comps]
            order = sorted(range(len(comps)), key=lambda k: (areas[k], min(comps[k])))
            small = order[0]
            if areas[small] >= policy.ratio * max(areas):
                break
            shared: dict[int, float] = {}
            for f in comps[small]:
                for e in sub.edges(f):
                    g = sub.face_across(e)
                    if g is None:
                        continue
                    v = sub.owner[g]
                    if v is not None and v != u:
                        shared[v] = shared.get(v, 0.0) + math.dist(*e)
            if not shared:
                break
            best = max(sorted(shared), key=lambda v: shared[v])
            for f in comps[small]:
                sub.set_owner(f, best)
        if len(sub.unit_components(u)) > targets.get(u, 1):
            residual.append(u)
    return residual


def reconnect_orphans(
    geoms: Sequence[BaseGeometry], policy: OrphanPolicy = OrphanPolicy(), targets: Sequence[int] | None = None
) -> tuple[list[BaseGeometry], list[int]]:
    """Geometry-level orphan cleanup for a clean tiling.

    ``targets`` gives the allowed component count per unit (default 1).
    Returns the new geometries and the indices still disconnected.
    """
    geoms = list(geoms)
    pieces = polygonize(noded_union(geoms))
    owners = compute_owner_sets(pieces, geoms)
    sub = Subdivision()
    for u in range(len(geoms)):
        sub.unit_faces[u] = set()
    for p, s in zip(pieces, owners):
        rings = piece_rings(p)
        sub.add(rings[0], rings[1:], owner=min(s) if s else None, owner_set=s)
    tmap = {u: (targets[u] if targets is not None else 1) for u in range(len(geoms))}
    residual = reconnect_in_subdivision(sub, tmap, policy, list(range(len(geoms))))
    out = []
    for u in range(len(geoms)):
        polys = [sub.polygon(f) for f in sorted(sub.unit_faces[u])]
        out.append(shapely.union_all(polys) if polys else Polygon())
    return out, residual


# ---------------------------------------------------------------------------
# rook-to-queen


@dataclass(frozen=True)
class QueenConversion:
    length_threshold: float
    disk_radius_factor: float = 0.55
    segments: int = 64
    max_units_per_hull: int = 8
    max_passes: int = 5


@dataclass
class QueenReport:
    converted: int = 0
    hulls: int = 0
    crowded_hulls: list[list[int]] = field(default_factory=list)
    skipped: list[dict] = field(default_factory=list)


def _disk(center: tuple[float, float], radius: float, segments: int) -> Polygon:
    ang = np.linspace(0.0, 2.0 * math.pi, segments, endpoint=False)
    return Polygon(np.column_stack([center[0] + radius * np.cos(ang), center[1] + radius * np.sin(ang)]))


def short_rook_contacts(geoms: Sequence[BaseGeometry], threshold: float) -> list[tuple[int, int, list[LineString]]]:
    """Pairs whose total shared boundary is positive but below the threshold."""
    arr = np.array(geoms, dtype=object)
    tree = shapely.STRtree(arr)
    left, right = tree.query(arr, predicate="intersects")
    out = []
    for a, b in sorted({(int(x), int(y)) for x, y in zip(left, right) if x < y}):
        inter = geoms[a].boundary.intersection(geoms[b].boundary)
        length = inter.length
        if 0 < length < threshold:
            lines = [g for g in getattr(inter, "geoms", [inter]) if isinstance(g, (LineString, MultiLineString))]
            merged = shapely.line_merge(MultiLineString([c for l in lines for c in getattr(l, "geoms", [l])]))
            out.append((a, b, [g for g in getattr(merged, "geoms", [merged]) if g.length > 0]))
    return out


def rook_to_queen(
    geoms: Sequence[BaseGeometry], conv: QueenConversion
) -> tuple[list[BaseGeometry], QueenReport]:
    """Replace every rook contact shorter than the threshold by a point contact.

    Each short contact gets a disk around it; overlapping disks merge into the
    convex hull of their union.  The disk is cut out of the tiling and refilled
    with pie slices from its centre, one per boundary arc, so that all the
    units around it meet at a single point.
    """
    geoms = list(geoms)
    report = QueenReport()
    for _ in range(conv.max_passes):
        short = short_rook_contacts(geoms, conv.length_threshold)
        if not short:
            break
        disks = []
        for a, b, lines in short:
            for line in lines:
                cs = list(line.coords)
                p, q = cs[0], cs[-1]
                if p == q:
                    report.skipped.append({"units": [a, b], "reason": "closed-contact"})
                    continue
                c = (0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1]))
                far = max(math.dist(c, v) for v in cs)
                r = max(conv.disk_radius_factor * math.dist(p, q), conv.disk_radius_factor / 0.5 * far)
                disks.append((_disk(c, r, conv.segments), c, (a, b)))
        shapes = _merge_disks(disks)
        progress = False
        for shape, center, pairs in shapes:
            ok, geoms, info = _carve_and_fill(geoms, shape, center, conv)
            if ok:
                report.converted += len(pairs)
                report.hulls += 1
                progress = True
                if len(info) > conv.max_units_per_hull:
                    report.crowded_hulls.append(info)
            else:
                report.skipped.append({"units": sorted({u for p in pairs for u in p}), "reason": info})
        if not progress:
            break
    return geoms, report


def _merge_disks(disks):
    n = len(disks)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if disks[i][0].intersects(disks[j][0]):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    shapes = []
    for members in groups.values():
        pairs = [disks[k][2] for k in members]
        if len(members) == 1:
            d, c, _ = disks[members[0]]
            shapes.append((d, c, pairs))
        else:
            hull = shapely.convex_hull(shapely.union_all([disks[k][0] for k in members]))
            c = hull.centroid
            shapes.append((hull, (c.x, c.y), pairs))
    shapes.sort(key=lambda s: (s[1][0], s[1][1]))
    return shapes


def _carve_and_fill(geoms, shape: Polygon, center, conv: QueenConversion):
    arr = np.array(geoms, dtype=object)
    tree = shapely.STRtree(arr)
    cand = sorted(int(k) for k in tree.query(shape, predicate="intersects"))
    affected = [k for k in cand if geoms[k].intersection(shape).area > 0]
    if not affected:
        return False, geoms, "empty-disk"
    cover = shapely.union_all([geoms[k] for k in affected])
    if shape.difference(cover).area > 1e-12 * shape.area:
        return False, geoms, "disk-leaves-tiling"
    if any(shape.covers(geoms[k]) for k in affected):
        return False, geoms, "disk-swallows-unit"
    local = [geoms[k] for k in affected]
    pieces = polygonize(noded_union(local + [shape]))
    pts = representative_points(pieces)
    inside = shapely.within(pts, shape)
    owners = compute_owner_sets(pieces, local)
    edge_owner: dict = {}
    inner_edges = []
    outer: dict[int, list[Polygon]] = {k: [] for k in range(len(local))}
    for p, ins, s in zip(pieces, inside, owners):
        rings = piece_rings(p)
        if ins:
            for r in rings:
                inner_edges.extend((r[i], r[(i + 1) % len(r)]) for i in range(len(r)))
            continue
        if not s:
            continue  # enclosed by the local units but owned by another one
        if len(s) != 1:
            return False, geoms, "tiling-not-clean"
        (k,) = s
        outer[k].append(p)
        for r in rings:
            for i in range(len(r)):
                edge_owner[(r[i], r[(i + 1) % len(r)])] = k
    inner_set = set(inner_edges)
    boundary = [e for e in inner_edges if (e[1], e[0]) not in inner_set]
    nxt = {}
    for a, b in boundary:
        if a in nxt:
            return False, geoms, "disk-boundary-not-simple"
        nxt[a] = b
    if not boundary:
        return False, geoms, "empty-disk"
    start = min(nxt)
    ring = [start]
    while True:
        b = nxt[ring[-1]]
        if b == start:
            break
        ring.append(b)
    if len(ring) != len(nxt):
        return False, geoms, "disk-boundary-not-simple"
    owner_of = []
    for i in range(len(ring)):
        a, b = ring[i], ring[(i + 1) % len(ring)]
        o = edge_owner.get((b, a))
        if o is None:
            return False, geoms, "disk-leaves-tiling"
        owner_of.append(o)
    changes = [i for i in range(len(ring)) if owner_of[i] != owner_of[i - 1]]
    pies: dict[int, list[Polygon]] = {k: [] for k in range(len(local))}
    if not changes:
        return False, geoms, "single-unit-disk"
    for j, s in enumerate(changes):
        e = changes[(j + 1) % len(changes)]
        arc = [ring[s]]
        i = s
        while i != e:
            i = (i + 1) % len(ring)
            arc.append(ring[i])
        pie = Polygon([center] + arc)
        if not pie.is_valid or pie.area <= 0:
            return False, geoms, "pie-not-star-shaped"
        pies[owner_of[s]].append(pie)
    out = list(geoms)
    for k, gk in enumerate(affected):
        parts = outer[k] + pies[k]
        out[gk] = shapely.union_all(parts)
    return True, out, [affected[k] for k in range(len(local)) if pies[k]]
