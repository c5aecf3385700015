"""Filling gaps between units.

A gap ring is split into sub-boundaries (maximal arcs bordered by a single
unit, or by nothing of the current region).  Sub-boundaries are replaced by
shortest paths, carving the pockets in between; what remains is filled by
dispatching on the number of sub-boundaries:

* one distinct adjacent unit: the whole gap goes to it;
* three: angle-bisector cuts, with the inner triangle split at its incenter;
* four or more: the nearest strongly mutually visible pair is bridged and
  the one or two leftover gaps, each with fewer sub-boundaries, recurse.

Exterior arcs are never convexified and are handled by dedicated splits.
All constructions reuse gap vertices or shared new points, so the regions
produced tile the gap exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import shapely
from shapely.geometry import LineString, Point as ShPoint, Polygon
from shapely.geometry.base import BaseGeometry

from .geometry import (
    Coord,
    GeometryError,
    angle_bisector_ray,
    incenter,
    orient2d,
    point_segment_distance,
    segment_intersection,
    signed_area,
)
from .model import EXTERIOR, Gap, SubBoundary
from .paths import PolygonRouter, arc_indices, carve_pockets, is_outward_convex
from .visibility import build_bridge, gap_diameter, loops_from_walk, pair_distance, strongly_mutually_visible

Edge = tuple[Coord, Coord]

TOO_LARGE = "too-large"
NOT_SIMPLY_CONNECTED = "not-simply-connected"
EXTERIOR_ONLY = "exterior-only"
NO_VISIBLE_PAIR = "no-visible-pair"
RECURSION_LIMIT = "recursion-limit"


@dataclass
class FillResult:
    """Regions (ring, owner) covering the gap, plus any parts left unfilled."""

    regions: list[tuple[tuple[Coord, ...], Any]] = field(default_factory=list)
    unfilled: list[tuple[tuple[Coord, ...], str]] = field(default_factory=list)
    bridges: list[dict] = field(default_factory=list)
    max_depth: int = 0
    notes: list[str] = field(default_factory=list)


def extract_sub_boundaries(ring: Sequence[Coord], edge_owner: Callable[[Edge], Any]) -> list[SubBoundary]:
    """Group consecutive ring edges with the same owner into sub-boundaries.

    ``edge_owner`` returns the owner across a directed ring edge, or None
    for nothing (tagged exterior).  A ring with a single owner all round
    yields one sub-boundary with ``start == end == 0``.
    """
    n = len(ring)
    owners = []
    for i in range(n):
        o = edge_owner((ring[i], ring[(i + 1) % n]))
        owners.append(EXTERIOR if o is None else o)
    changes = [i for i in range(n) if owners[i] != owners[i - 1]]
    if not changes:
        return [SubBoundary(0, 0, owners[0])]
    subs = []
    for k, s in enumerate(changes):
        e = changes[(k + 1) % len(changes)]
        subs.append(SubBoundary(s, e, owners[s]))
    return subs


def sub_boundaries_from_units(
    gap: Polygon, units: Mapping[Any, BaseGeometry], tol: float = 0.0
) -> tuple[tuple[Coord, ...], list[SubBoundary]]:
    """Sub-boundaries of a gap polygon against a mapping of unit geometries.

    An edge belongs to a unit when the edge midpoint and both endpoints lie
    on the unit boundary (within ``tol``).
    """
    ring = list(shapely.geometry.polygon.orient(gap, 1.0).exterior.coords)[:-1]
    ring = [(float(x), float(y)) for x, y in ring]
    keys = sorted(units, key=lambda k: (str(type(k)), k))
    bounds = {k: units[k].boundary for k in keys}

    def owner(e):
        a, b = e
        mid = ShPoint(0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]))
        for k in keys:
            bd = bounds[k]
            if bd.distance(mid) <= tol and bd.distance(ShPoint(a)) <= tol and bd.distance(ShPoint(b)) <= tol:
                return k
        return None

    return tuple(ring), extract_sub_boundaries(ring, owner)


def _ring_edges(ring: Sequence[Coord]):
    n = len(ring)
    for i in range(n):
        yield ring[i], ring[(i + 1) % n]


def trace_faces(edges: Sequence[Edge]) -> list[list[Coord]]:
    """Bounded faces (CCW) of a connected planar straight-line graph."""
    adj: dict[Coord, set[Coord]] = {}
    for a, b in edges:
        if a == b:
            continue
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    order = {
        v: sorted(ns, key=lambda w: math.atan2(w[1] - v[1], w[0] - v[0])) for v, ns in adj.items()
    }
    slot = {v: {w: k for k, w in enumerate(ns)} for v, ns in order.items()}
    seen: set[Edge] = set()
    faces = []
    for u in order:
        for v in order[u]:
            if (u, v) in seen:
                continue
            face = []
            a, b = u, v
            while (a, b) not in seen:
                seen.add((a, b))
                face.append(a)
                ns = order[b]
                c = ns[(slot[b][a] - 1) % len(ns)]
                a, b = b, c
            if len(face) >= 3 and signed_area(face) > 0:
                faces.append(face)
    return faces


def _rel_close(a: float, b: float, rel: float = 1e-8) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def _point_polyline_distance(p: Coord, arc: Sequence[Coord]) -> float:
    return min(point_segment_distance(p, arc[k], arc[k + 1]) for k in range(len(arc) - 1))


class GapFiller:
    """Fills one gap ring given the owner across each of its edges."""

    def __init__(self, coincidence: float = 1e-9, max_depth: int | None = None):
        self.coincidence = coincidence
        self.max_depth = max_depth

    def fill(self, ring: Sequence[Coord], edge_owner: Mapping[Edge, Any]) -> FillResult:
        ring = [tuple(map(float, p)) for p in ring]
        if signed_area(ring) < 0:
            ring.reverse()
        self._outside: dict[Edge, Any] = dict(edge_owner)
        self._res = FillResult()
        self._limit = self.max_depth if self.max_depth is not None else 2 * len(ring) + 8
        self._fill(ring, 0, True)
        return self._res

    # -- bookkeeping ----------------------------------------------------------

    def _owner_of(self, e: Edge) -> Any:
        o = self._outside.get(e)
        return EXTERIOR if o is None else o

    def _assign(self, ring: Sequence[Coord], owner: Any) -> None:
        ring = tuple(ring)
        self._res.regions.append((ring, owner))
        for a, b in _ring_edges(ring):
            self._outside[(b, a)] = owner

    def _leave(self, ring: Sequence[Coord], reason: str) -> None:
        ring = tuple(ring)
        self._res.unfilled.append((ring, reason))
        for a, b in _ring_edges(ring):
            self._outside[(b, a)] = None

    def _fallback(self, ring: Sequence[Coord], subs: Sequence[SubBoundary], why: str) -> None:
        n = len(ring)
        length: dict[Any, float] = {}
        for s in subs:
            if s.is_exterior:
                continue
            idx = arc_indices(n, s.start, s.end) if s.start != s.end else list(range(n)) + [0]
            length[s.owner] = length.get(s.owner, 0.0) + sum(
                math.dist(ring[a], ring[b]) for a, b in zip(idx, idx[1:])
            )
        owner = max(sorted(length, key=_owner_key), key=lambda o: length[o])
        self._res.notes.append(f"fallback ({why}): gap of {len(subs)} sub-boundaries assigned whole")
        self._assign(ring, owner)

    # -- dispatch -------------------------------------------------------------

    def _fill(self, ring: list[Coord], depth: int, convexify: bool) -> None:
        self._res.max_depth = max(self._res.max_depth, depth)
        if depth > self._limit:
            self._leave(ring, RECURSION_LIMIT)
            return
        subs = extract_sub_boundaries(ring, self._owner_of)
        owners = {s.owner for s in subs if not s.is_exterior}
        if not owners:
            self._leave(ring, EXTERIOR_ONLY)
            return
        if len(owners) == 1:
            self._assign(ring, next(iter(owners)))
            return
        m = len(subs)
        has_ext = any(s.is_exterior for s in subs)
        if m == 3 and len(ring) == 3 and not has_ext:
            for region, owner in triangle_incenter_regions(ring, [s.owner for s in subs], subs):
                self._assign(region, owner)
            return
        if convexify and self._convexify(ring, subs, depth):
            return
        try:
            if m == 3 and has_ext:
                self._fill3_exterior(ring, subs)
            elif m == 3:
                self._fill3(ring, subs)
            elif m >= 4:
                self._fill4(ring, subs, depth)
            else:
                self._fallback(ring, subs, "two sub-boundaries after convexification")
        except GeometryError as exc:
            self._fallback(ring, subs, str(exc))

    def _convexify(self, ring: list[Coord], subs: list[SubBoundary], depth: int) -> bool:
        n = len(ring)
        router = None
        pockets: list[tuple[list[int], Any]] = []
        replacement: list[list[int]] = []
        for s in subs:
            arc = arc_indices(n, s.start, s.end)
            if s.is_exterior or len(arc) == 2 or is_outward_convex(ring, s.start, s.end):
                replacement.append(arc)
                continue
            router = router or PolygonRouter(ring)
            carved, sp = carve_pockets(ring, s.start, s.end, router)
            replacement.append(sp)
            pockets.extend((p, s.owner) for p in carved)
        if not pockets:
            return False
        walk = [ring[i] for path in replacement for i in path[:-1]]
        loops = loops_from_walk(walk)
        total = sum(signed_area([ring[i] for i in p]) for p, _ in pockets) + sum(signed_area(l) for l in loops)
        if not _rel_close(total, signed_area(ring)):
            raise GeometryError("convexification does not conserve area")
        for p, owner in pockets:
            self._assign([ring[i] for i in p], owner)
        for loop in loops:
            self._fill(loop, depth, False)
        return True

    # -- three sub-boundaries ------------------------------------------------------

    def _fill3(self, ring: list[Coord], subs: list[SubBoundary]) -> None:
        for region, owner in self._bisector_regions(ring, subs):
            self._assign(region, owner)

    def _bisector_regions(self, ring: list[Coord], subs: list[SubBoundary]):
        n = len(ring)
        vs = [s.start for s in subs]
        rays = [angle_bisector_ray(ring, v) for v in vs]
        hits: dict[tuple[int, int], tuple[Coord, float, float]] = {}
        for k in range(3):
            l = (k + 1) % 3
            (o1, d1), (o2, d2) = rays[k], rays[l]
            den = d1[0] * d2[1] - d1[1] * d2[0]
            if den == 0.0:
                raise GeometryError("parallel angle bisectors")
            wx, wy = o2[0] - o1[0], o2[1] - o1[1]
            t = (wx * d2[1] - wy * d2[0]) / den
            u = (wx * d1[1] - wy * d1[0]) / den
            if t <= 0 or u <= 0:
                raise GeometryError("angle bisectors meet outside the gap")
            hits[(k, l)] = ((o1[0] + t * d1[0], o1[1] + t * d1[1]), t, u)
        pts = [hits[(k, (k + 1) % 3)][0] for k in range(3)]
        diam = gap_diameter(ring)
        spread = max(math.dist(pts[a], pts[b]) for a in range(3) for b in range(a + 1, 3))
        arcs = [[ring[i] for i in arc_indices(n, s.start, s.end)] for s in subs]
        if spread <= self.coincidence * diam:
            x = pts[0]
            self._check_cuts(ring, vs, [[ring[v], x] for v in vs])
            return [(arcs[k] + [x], subs[k].owner) for k in range(3)]
        cuts = []
        for k in range(3):
            nxt_hit = hits[(k, (k + 1) % 3)]
            prv_hit = hits[((k - 1) % 3, k)]
            on_line = sorted([(nxt_hit[1], nxt_hit[0]), (prv_hit[2], prv_hit[0])])
            cuts.append([ring[vs[k]], on_line[0][1], on_line[1][1]])
        self._check_cuts(ring, vs, cuts)
        edges = list(_ring_edges(ring))
        for c in cuts:
            edges.extend(zip(c, c[1:]))
        faces = trace_faces(edges)
        sub_of = {}
        for k, s in enumerate(subs):
            idx = arc_indices(n, s.start, s.end)
            for a, b in zip(idx, idx[1:]):
                sub_of[(ring[a], ring[b])] = k
        out = []
        face_owner: dict[Edge, Any] = {}
        triangle = None
        for f in faces:
            touched = {sub_of[e] for e in _ring_edges(f) if e in sub_of}
            if len(touched) == 1:
                owner = subs[touched.pop()].owner
                out.append((f, owner))
                for e in _ring_edges(f):
                    face_owner[e] = owner
            elif not touched and len(f) == 3:
                if triangle is not None:
                    raise GeometryError("bisector cuts produced two inner triangles")
                triangle = f
            else:
                raise GeometryError("bisector cuts produced an unexpected face")
        if triangle is None or len(out) != 3:
            raise GeometryError("bisector cuts did not partition the gap")
        owners = [face_owner[(b, a)] for a, b in _ring_edges(triangle)]
        out.extend(triangle_incenter_regions(triangle, owners))
        if not _rel_close(sum(signed_area(r) for r, _ in out), signed_area(ring)):
            raise GeometryError("bisector partition does not conserve area")
        return out

    def _check_cuts(self, ring: list[Coord], vs: list[int], cuts: list[list[Coord]]) -> None:
        edges = list(_ring_edges(ring))
        for k, cut in enumerate(cuts):
            start = ring[vs[k]]
            for a, b in zip(cut, cut[1:]):
                for c, d in edges:
                    inter = segment_intersection((a, b), (c, d))
                    if inter.kind == "empty":
                        continue
                    if inter.kind == "point" and inter.geometry[0] == start and a == start:
                        continue
                    raise GeometryError("angle bisector leaves the gap")

    def _fill3_exterior(self, ring: list[Coord], subs: list[SubBoundary]) -> None:
        n = len(ring)
        e = next(k for k, s in enumerate(subs) if s.is_exterior)
        x, y, ext = subs[(e + 1) % 3], subs[(e + 2) % 3], subs[e]
        v = x.end
        cand = arc_indices(n, ext.start, ext.end)
        w = min(cand, key=lambda i: (math.dist(ring[v], ring[i]), i))
        sp = PolygonRouter(ring).shortest_path_indices(v, w)
        walk_y = [ring[i] for i in arc_indices(n, v, w)] + [ring[i] for i in sp[::-1]]
        walk_x = [ring[i] for i in arc_indices(n, w, v)] + [ring[i] for i in sp]
        ly, lx = loops_from_walk(walk_y), loops_from_walk(walk_x)
        if not _rel_close(sum(map(signed_area, ly + lx)), signed_area(ring)):
            raise GeometryError("exterior split does not conserve area")
        for loop in ly:
            self._assign(loop, y.owner)
        for loop in lx:
            self._assign(loop, x.owner)

    # -- four or more sub-boundaries ---------------------------------------------

    def _fill4(self, ring: list[Coord], subs: list[SubBoundary], depth: int) -> None:
        n = len(ring)
        m = len(subs)
        arcs = [[ring[i] for i in arc_indices(n, s.start, s.end)] for s in subs]
        pairs = []
        for i in range(m):
            for j in range(i + 1, m):
                if j == i + 1 or (i == 0 and j == m - 1):
                    continue
                if subs[i].is_exterior and subs[j].is_exterior:
                    continue
                pairs.append((pair_distance(arcs[i], arcs[j]), i, j))
        pairs.sort()
        router = PolygonRouter(ring)
        area = signed_area(ring)
        for _, i, j in pairs:
            si, sj = subs[i], subs[j]
            if si.is_exterior or sj.is_exterior:
                if self._exterior_wedge(ring, subs, i, j, router, depth):
                    return
                continue
            pi, pj = (si.start, si.end), (sj.start, sj.end)
            if not strongly_mutually_visible(ring, pi, pj, router):
                continue
            try:
                br = build_bridge(ring, pi, pj, router)
            except GeometryError as exc:
                self._res.notes.append(f"bridge skipped: {exc}")
                continue
            parts = br.regions_i + br.regions_j + br.remaining
            if not br.regions_i + br.regions_j or not _rel_close(sum(map(signed_area, parts)), area):
                self._res.notes.append("bridge skipped: area mismatch")
                continue
            self._res.bridges.append(
                {
                    "pair": (si.owner, sj.owner),
                    "subs": m,
                    "crossing": br.crossing,
                    "beta1": br.beta1,
                    "beta2": br.beta2,
                }
            )
            for r in br.regions_i:
                self._assign(r, si.owner)
            for r in br.regions_j:
                self._assign(r, sj.owner)
            for loop in br.remaining:
                if len(extract_sub_boundaries(loop, self._owner_of)) >= m:
                    self._res.notes.append("leftover gap did not have fewer sub-boundaries")
                self._fill(loop, depth + 1, True)
            return
        self._leave(ring, NO_VISIBLE_PAIR)

    def _exterior_wedge(self, ring, subs, i, j, router, depth) -> bool:
        n = len(ring)
        k, e = (i, j) if subs[j].is_exterior else (j, i)
        b, ext = subs[k], subs[e]
        arc = [ring[t] for t in arc_indices(n, b.start, b.end)]
        cand = arc_indices(n, ext.start, ext.end)
        w = min(cand, key=lambda t: (_point_polyline_distance(ring[t], arc), t))
        p1 = router.shortest_path_indices(b.end, w)
        p2 = router.shortest_path_indices(w, b.start)
        pts = lambda idx: [ring[t] for t in idx]
        region = loops_from_walk(arc + pts(p1) + pts(p2))
        if not region or sum(map(signed_area, region)) <= 0:
            return False
        g1 = loops_from_walk(pts(arc_indices(n, b.end, w)) + pts(p1[::-1]))
        g2 = loops_from_walk(pts(arc_indices(n, w, b.start)) + pts(p2[::-1]))
        if not _rel_close(sum(map(signed_area, region + g1 + g2)), signed_area(ring)):
            return False
        for r in region:
            self._assign(r, b.owner)
        for loop in g1 + g2:
            self._fill(loop, depth + 1, True)
        return True


def _owner_key(o: Any) -> tuple:
    if isinstance(o, (int, float)) and not isinstance(o, bool):
        return (0, o, "")
    return (1, str(o))


def triangle_incenter_regions(
    triangle: Sequence[Coord], owners: Sequence[Any], subs: Sequence[SubBoundary] | None = None
) -> list[tuple[list[Coord], Any]]:
    """Split a triangle at its incenter; side k (vertex k to k+1) goes to owners[k].

    When ``subs`` is given the sides are taken from the sub-boundaries, which
    need not start at vertex 0.
    """
    tri = list(triangle)
    m = incenter(tri)
    out = []
    if subs is not None:
        for s, owner in zip(subs, owners):
            out.append(([tri[s.start], tri[s.end], m], owner))
        return out
    for k in range(3):
        out.append(([tri[k], tri[(k + 1) % 3], m], owners[k]))
    return out


def fill_triangle_incenter(triangle: Sequence[Coord], owners: Sequence[Any]) -> list[tuple[list[Coord], Any]]:
    tri = [tuple(map(float, p)) for p in triangle]
    if signed_area(tri) < 0:
        raise GeometryError("triangle must be counter-clockwise")
    return triangle_incenter_regions(tri, owners)


def _edge_owner_map(gap: Gap) -> dict[Edge, Any]:
    ring = gap.ring
    n = len(ring)
    out = {}
    for s in gap.subs:
        idx = arc_indices(n, s.start, s.end) if s.start != s.end else list(range(n)) + [0]
        for a, b in zip(idx, idx[1:]):
            out[(ring[a], ring[b])] = None if s.is_exterior else s.owner
    return out


def fill_gap(gap: Gap, filler: GapFiller | None = None) -> FillResult:
    """Fill a gap described by its ring and sub-boundary owners."""
    if gap.holes:
        res = FillResult()
        res.unfilled.append((gap.ring, NOT_SIMPLY_CONNECTED))
        return res
    return (filler or GapFiller()).fill(gap.ring, _edge_owner_map(gap))



def _chords(poly: Polygon, hole: Sequence[Coord], others: Sequence[Coord]) -> list[LineString]:
    """Two disjoint straight chords from distinct hole vertices to other boundary vertices."""
    cand = sorted(
        (math.dist(h, o), k, i) for k, h in enumerate(hole) for i, o in enumerate(others)
    )
    first = None
    for _, k, i in cand:
        if first is not None and k == first[0]:
            continue
        line = LineString([hole[k], others[i]])
        if not shapely.relate_pattern(line, poly, "1FFF0F***"):
            continue
        if first is None:
            first = (k, i, line)
            continue
        if line.intersects(first[2]):
            continue
        return [first[2], line]
    return []


def split_holes(poly: Polygon, depth: int = 0) -> list[Polygon] | None:
    """Cut a gap with holes into simply connected parts along straight chords.

    Each hole gets two chords to other boundary vertices, which splits the
    gap into two parts; parts that still have holes are cut again.  Returns
    None when no valid chord pair exists.
    """
    if not poly.interiors:
        return [poly]
    if depth > 4 * len(poly.interiors) + 4:
        return None
    hole = list(poly.interiors[0].coords)[:-1]
    others = list(poly.exterior.coords)[:-1] + [c for r in poly.interiors[1:] for c in list(r.coords)[:-1]]
    chords = _chords(poly, hole, others)
    if not chords:
        return None
    faces = shapely.polygonize(list(shapely.get_parts(shapely.node(shapely.union_all([poly.boundary, *chords]))))).geoms
    parts = [f for f in faces if poly.covers(f.representative_point()) and not any(
        Polygon(r).contains(f.representative_point()) for r in poly.interiors
    )]
    if len(parts) < 2 or not _rel_close(sum(p.area for p in parts), poly.area):
        return None
    out = []
    for p in parts:
        sub = split_holes(shapely.geometry.polygon.orient(p, 1.0), depth + 1)
        if sub is None:
            return None
        out.extend(sub)
    return out
