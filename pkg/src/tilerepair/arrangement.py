"""Noding, polygonization, owner sets and overlap/gap diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import shapely
from shapely.geometry import LineString, MultiLineString, MultiPolygon, Polygon
from shapely.geometry.base import BaseGeometry

from .geometry import Coord, open_ring


class TilingError(ValueError):
    """Raised for data problems in a tiling (bad geometry, overlaps where none are allowed)."""


def polygons_of(geom: BaseGeometry) -> list[Polygon]:
    if geom is None or geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        return [geom]
    if isinstance(geom, MultiPolygon):
        return list(geom.geoms)
    if hasattr(geom, "geoms"):
        out: list[Polygon] = []
        for g in geom.geoms:
            out.extend(polygons_of(g))
        return out
    return []


def bbox_diagonal(geoms: Iterable[BaseGeometry]) -> float:
    geoms = [g for g in geoms if g is not None and not g.is_empty]
    if not geoms:
        return 0.0
    b = shapely.bounds(np.array(geoms, dtype=object))
    return math.hypot(b[:, 2].max() - b[:, 0].min(), b[:, 3].max() - b[:, 1].min())


def default_snap_tolerance(geoms: Iterable[BaseGeometry], relative: float = 1e-9) -> float:
    return relative * bbox_diagonal(geoms)


def snap_grid(tolerance: float) -> float:
    """Largest power of ten not exceeding the tolerance (0 disables snapping)."""
    if tolerance <= 0:
        return 0.0
    return 10.0 ** math.floor(math.log10(tolerance))


def clean_polygonal(geom: BaseGeometry, grid: float) -> BaseGeometry:
    """Snap to the grid, repair validity and keep only polygonal parts."""
    if grid > 0:
        geom = shapely.set_precision(geom, grid)
    if not geom.is_valid:
        geom = shapely.make_valid(geom)
    polys = [p for p in polygons_of(geom) if p.area > 0]
    if not polys:
        return Polygon()
    return polys[0] if len(polys) == 1 else MultiPolygon(polys)


def boundary_lines(geoms: Iterable[BaseGeometry]) -> list[LineString]:
    lines: list[LineString] = []
    for g in geoms:
        for p in polygons_of(g):
            lines.append(LineString(p.exterior.coords))
            lines.extend(LineString(r.coords) for r in p.interiors)
    return lines


@dataclass
class NodedGraph:
    """Fully noded linework: every intersection is a vertex."""

    lines: MultiLineString
    vertices: set[Coord] = field(default_factory=set)
    edges: set[frozenset] = field(default_factory=set)

    @classmethod
    def from_lines(cls, lines: MultiLineString) -> "NodedGraph":
        verts: set[Coord] = set()
        edges: set[frozenset] = set()
        for ls in getattr(lines, "geoms", [lines]):
            cs = [(float(x), float(y)) for x, y in ls.coords]
            verts.update(cs)
            for a, b in zip(cs, cs[1:]):
                if a != b:
                    edges.add(frozenset((a, b)))
        return cls(lines, verts, edges)


def noded_union(geoms: Sequence[BaseGeometry], grid: float = 0.0) -> NodedGraph:
    """Node the boundaries of all input polygons against each other."""
    lines = boundary_lines(geoms)
    if not lines:
        return NodedGraph(MultiLineString())
    ml = MultiLineString(lines)
    if grid > 0:
        ml = shapely.set_precision(ml, grid)
    noded = shapely.node(ml)
    return NodedGraph.from_lines(noded)


def orient_ccw(poly: Polygon) -> Polygon:
    return shapely.geometry.polygon.orient(poly, 1.0)


def polygonize(graph: NodedGraph) -> list[Polygon]:
    """Bounded faces of the noded linework, exterior rings counter-clockwise."""
    if graph.lines.is_empty:
        return []
    faces = shapely.polygonize(list(graph.lines.geoms))
    out = [orient_ccw(f) for f in faces.geoms if f.area > 0]
    return out


def representative_points(pieces: Sequence[Polygon]) -> np.ndarray:
    """Centroid when it lies strictly inside the piece, else a GEOS interior point."""
    arr = np.array(pieces, dtype=object)
    if len(arr) == 0:
        return arr
    cents = shapely.centroid(arr)
    inside = shapely.contains_properly(arr, cents)
    out = cents.copy()
    if (~inside).any():
        out[~inside] = shapely.point_on_surface(arr[~inside])
    return out


def compute_owner_sets(pieces: Sequence[Polygon], units: Sequence[BaseGeometry]) -> list[frozenset[int]]:
    """For each piece, the indices of the units that contain it."""
    if not pieces:
        return []
    pts = representative_points(pieces)
    tree = shapely.STRtree(np.array(units, dtype=object))
    pidx, uidx = tree.query(pts, predicate="within")
    sets: list[set[int]] = [set() for _ in pieces]
    for p, u in zip(pidx.tolist(), uidx.tolist()):
        sets[p].add(u)
    # a point within float noise of the piece boundary may also sit on a
    # unit boundary; decide those pieces by overlap area instead
    parr = np.array(pieces, dtype=object)
    clearance = shapely.distance(pts, shapely.boundary(parr))
    scale = bbox_diagonal(pieces)
    for k in np.nonzero(clearance <= 1e-12 * scale)[0].tolist():
        piece = pieces[k]
        cands = tree.query(piece, predicate="intersects")
        sets[k] = {int(u) for u in cands if piece.intersection(units[u]).area > 0.5 * piece.area}
    return [frozenset(s) for s in sets]


def edge_components(rings_by_piece: Sequence[Sequence[Sequence[Coord]]], members: Sequence[int]) -> list[list[int]]:
    """Group pieces (given as lists of open rings) that share a boundary edge."""
    parent = {m: m for m in members}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    seen: dict[frozenset, int] = {}
    for m in members:
        for ring in rings_by_piece[m]:
            n = len(ring)
            for i in range(n):
                e = frozenset((ring[i], ring[(i + 1) % n]))
                if e in seen:
                    a, b = find(seen[e]), find(m)
                    if a != b:
                        parent[a] = b
                else:
                    seen[e] = m
    groups: dict[int, list[int]] = {}
    for m in members:
        groups.setdefault(find(m), []).append(m)
    return sorted(groups.values(), key=lambda g: min(g))


def piece_rings(poly: Polygon) -> list[list[Coord]]:
    return [open_ring(poly.exterior.coords)] + [open_ring(r.coords) for r in poly.interiors]


@dataclass
class DiagnosticsReport:
    overlap_count: int
    gap_count: int
    overlap_area: float
    gap_area: float
    per_unit: dict = field(default_factory=dict)

    def summary(self) -> str:
        return f"{self.overlap_count} overlaps, {self.gap_count} gaps"

    def to_dict(self) -> dict:
        return {
            "overlap_count": self.overlap_count,
            "gap_count": self.gap_count,
            "overlap_area": self.overlap_area,
            "gap_area": self.gap_area,
            "per_unit": {str(k): v for k, v in self.per_unit.items()},
        }


def doctor(
    geoms: Sequence[BaseGeometry],
    ids: Sequence | None = None,
    extent: BaseGeometry | str | None = None,
    grid: float = 0.0,
) -> DiagnosticsReport:
    """Count connected overlap regions and gap regions of a tiling.

    Gaps are bounded order-0 faces of the arrangement.  With ``extent`` (a
    polygon, or ``"hull"`` for the convex hull of the input) the part of the
    extent not covered by any unit also counts, except slivers along the
    extent boundary thinner than twice the snap grid.
    """
    geoms = list(geoms)
    ids = list(ids) if ids is not None else list(range(len(geoms)))
    extra: list[BaseGeometry] = []
    ext_geom = None
    if extent is not None:
        ext_geom = shapely.convex_hull(shapely.union_all(geoms)) if extent == "hull" else extent
        extra.append(ext_geom)
    graph = noded_union(geoms + extra, grid)
    pieces = polygonize(graph)
    if ext_geom is not None:
        pts = representative_points(pieces)
        keep = shapely.within(pts, ext_geom) if len(pieces) else np.zeros(0, bool)
        pieces = [p for p, k in zip(pieces, keep) if k]
    owners = compute_owner_sets(pieces, geoms)
    rings = [piece_rings(p) for p in pieces]
    over = [k for k, s in enumerate(owners) if len(s) >= 2]
    gaps = [k for k, s in enumerate(owners) if len(s) == 0]
    over_groups = edge_components(rings, over)
    gap_groups = edge_components(rings, gaps)
    if ext_geom is not None and gap_groups:
        # rounding leaves grid-wide slivers between the hull and straight unit edges
        tol = grid or snap_grid(default_snap_tolerance(geoms))
        rim = ext_geom.boundary
        keep_groups = []
        for grp in gap_groups:
            g = shapely.union_all([pieces[k] for k in grp])
            if g.intersects(rim) and g.buffer(-tol).is_empty:
                continue
            keep_groups.append(grp)
        gap_groups = keep_groups
        gaps = [k for grp in gap_groups for k in grp]
    per_unit: dict = {}
    for grp in over_groups:
        for u in set().union(*(owners[k] for k in grp)):
            per_unit.setdefault(ids[u], {"overlaps": 0, "gaps": 0})["overlaps"] += 1
    # a unit touches a gap if they share boundary length
    tree = shapely.STRtree(np.array(geoms, dtype=object)) if geoms else None
    for grp in gap_groups:
        gpoly = shapely.union_all([pieces[k] for k in grp])
        for u in sorted(tree.query(gpoly, predicate="intersects").tolist()):
            if gpoly.boundary.intersection(geoms[u].boundary).length > 0:
                per_unit.setdefault(ids[u], {"overlaps": 0, "gaps": 0})["gaps"] += 1
    return DiagnosticsReport(
        overlap_count=len(over_groups),
        gap_count=len(gap_groups),
        overlap_area=math.fsum(pieces[k].area for k in over),
        gap_area=math.fsum(pieces[k].area for k in gaps),
        per_unit=per_unit,
    )
