"""End-to-end repair of a polygonal tiling and its adjacency graph."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np
import shapely
from shapely.geometry import MultiPolygon, Polygon
from shapely.geometry.base import BaseGeometry

from .arrangement import (
    TilingError,
    clean_polygonal,
    compute_owner_sets,
    default_snap_tolerance,
    doctor,
    edge_components,
    noded_union,
    piece_rings,
    polygonize,
    polygons_of,
    representative_points,
    snap_grid,
)
from .faces import Subdivision
from .finalize import OrphanPolicy, QueenConversion, reconnect_in_subdivision, rook_to_queen
from .gaps import NOT_SIMPLY_CONNECTED, TOO_LARGE, GapFiller, split_holes
from .geometry import signed_area
from .model import Unit, UnitId, sort_key
from .overlaps import assign_order1, assign_overlaps


@dataclass
class Region:
    id: UnitId
    geometry: BaseGeometry


@dataclass(frozen=True)
class RepairOptions:
    fill_gaps: bool = True
    gap_area_threshold: float = 0.1
    orphan_policy: OrphanPolicy = OrphanPolicy()
    queen_conversion: QueenConversion | None = None
    snap_tolerance: float | None = None
    # also fill small pockets between the tiling and its convex hull
    fill_boundary_pockets: bool = True
    # cut gaps with holes into simply connected parts instead of skipping them
    split_holed_gaps: bool = True


class AdjacencyEdge(NamedTuple):
    a: UnitId
    b: UnitId
    length: float
    kind: str  # "rook" or "queen"


@dataclass
class AdjacencyGraph:
    nodes: list[UnitId]
    edges: list[AdjacencyEdge]

    def rook_pairs(self) -> set[frozenset]:
        return {frozenset((e.a, e.b)) for e in self.edges if e.kind == "rook"}

    def queen_pairs(self) -> set[frozenset]:
        return {frozenset((e.a, e.b)) for e in self.edges if e.kind == "queen"}

    def rook_degree(self, uid: UnitId) -> int:
        return sum(1 for e in self.edges if e.kind == "rook" and uid in (e.a, e.b))

    def neighbours(self, uid: UnitId, kind: str = "rook") -> set[UnitId]:
        out = set()
        for e in self.edges:
            if e.kind == kind and uid in (e.a, e.b):
                out.add(e.b if e.a == uid else e.a)
        return out


@dataclass
class RepairReport:
    counts_before: dict = field(default_factory=dict)
    counts_after: dict = field(default_factory=dict)
    unfilled_gaps: list[dict] = field(default_factory=list)
    disconnected_units: list[UnitId] = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    overlap_stats: dict = field(default_factory=dict)
    queen: dict = field(default_factory=dict)
    gap_depth: int = 0
    pocket_area_filled: float = 0.0

    @property
    def has_exclusions(self) -> bool:
        return bool(self.unfilled_gaps or self.disconnected_units)

    def to_dict(self) -> dict:
        return {
            "counts_before": self.counts_before,
            "counts_after": self.counts_after,
            "unfilled_gaps": self.unfilled_gaps,
            "disconnected_units": [str(u) if not isinstance(u, (int, float)) else u for u in self.disconnected_units],
            "timings": self.timings,
            "notes": self.notes,
            "overlap_stats": self.overlap_stats,
            "queen": self.queen,
            "gap_depth": self.gap_depth,
            "pocket_area_filled": self.pocket_area_filled,
        }


class RepairResult(NamedTuple):
    units: list[Unit]
    graph: AdjacencyGraph
    report: RepairReport


def _counts(d) -> dict:
    return {"overlaps": d.overlap_count, "gaps": d.gap_count, "overlap_area": d.overlap_area, "gap_area": d.gap_area}


def adjacency_graph(units: Sequence[Unit], check_overlaps: bool = True) -> AdjacencyGraph:
    """Rook edges (positive shared length) and queen edges (point contact only)."""
    units = list(units)
    geoms = np.array([u.geometry for u in units], dtype=object)
    ids = [u.id for u in units]
    edges: list[AdjacencyEdge] = []
    if len(units):
        tree = shapely.STRtree(geoms)
        left, right = tree.query(geoms, predicate="intersects")
        pairs = sorted({(int(a), int(b)) for a, b in zip(left, right) if a < b})
        for a, b in pairs:
            ga, gb = geoms[a], geoms[b]
            if check_overlaps and shapely.relate_pattern(ga, gb, "2********"):
                raise TilingError(f"units {ids[a]!r} and {ids[b]!r} overlap; repair the tiling first")
            length = ga.boundary.intersection(gb.boundary).length
            kind = "rook" if length > 0 else "queen"
            x, y = sorted((ids[a], ids[b]), key=sort_key)
            edges.append(AdjacencyEdge(x, y, length, kind))
    edges.sort(key=lambda e: (sort_key(e.a), sort_key(e.b)))
    return AdjacencyGraph(nodes=ids, edges=edges)


class _Prepared(NamedTuple):
    geoms: list[BaseGeometry]
    order: list[int]  # internal index -> position in the input list
    grid: float


def _prepare(units: Sequence[Unit], options: RepairOptions, extra: Sequence[BaseGeometry] = ()) -> _Prepared:
    ids = [u.id for u in units]
    if not ids:
        raise TilingError("no units to repair")
    if len(set(ids)) != len(ids):
        raise TilingError("unit ids must be unique")
    tol = options.snap_tolerance
    if tol is None:
        tol = default_snap_tolerance([u.geometry for u in units] + list(extra))
    grid = snap_grid(tol)
    order = sorted(range(len(units)), key=lambda k: sort_key(ids[k]))
    geoms = []
    for k in order:
        g = units[k].geometry
        if g is None or g.is_empty or not polygons_of(g):
            raise TilingError(f"unit {ids[k]!r} has no polygonal geometry")
        geoms.append(clean_polygonal(g, grid))
    return _Prepared(geoms, order, grid)


def _build(
    geoms: list[BaseGeometry],
    grid: float,
    regions: list[BaseGeometry] | None,
    unit_region: list[int] | None,
) -> Subdivision:
    graph = noded_union(geoms + list(regions or ()), grid)
    pieces = polygonize(graph)
    owners = compute_owner_sets(pieces, geoms)
    piece_region: list[int | None] = [None] * len(pieces)
    if regions is not None:
        pts = representative_points(pieces)
        tree = shapely.STRtree(np.array(regions, dtype=object))
        pidx, ridx = tree.query(pts, predicate="within")
        for p, r in sorted(zip(pidx.tolist(), ridx.tolist())):
            if piece_region[p] is None:
                piece_region[p] = r
    sub = Subdivision()
    for u in range(len(geoms)):
        sub.unit_faces[u] = set()
    for k, (p, s) in enumerate(zip(pieces, owners)):
        reg = piece_region[k]
        if regions is not None:
            if reg is None:
                continue
            s = frozenset(u for u in s if unit_region[u] == reg)
        rings = piece_rings(p)
        sub.add(rings[0], rings[1:], owner_set=s, region=reg)
    return sub


def _merge_gaps(sub: Subdivision) -> list[int]:
    """Merge edge-adjacent unowned faces of the same region into single gap faces."""
    gaps = [f for f in sub.faces() if sub.owner[f] is None and not sub.owner_set[f]]
    by_region: dict = {}
    for f in gaps:
        by_region.setdefault(sub.region[f], []).append(f)
    out = []
    for reg in sorted(by_region, key=lambda r: (r is None, r if r is not None else 0)):
        members = by_region[reg]
        rings = {f: [sub.rings[f], *sub.holes[f]] for f in members}
        for grp in edge_components(rings, members):
            if len(grp) == 1:
                out.append(grp[0])
                continue
            merged = shapely.union_all([sub.polygon(f) for f in grp])
            for f in grp:
                sub.remove(f)
            for poly in polygons_of(merged):
                rs = piece_rings(shapely.geometry.polygon.orient(poly, 1.0))
                out.append(sub.add(rs[0], rs[1:], region=reg))
    return out


def _unit_geometry(sub: Subdivision, u: int) -> BaseGeometry:
    polys = [sub.polygon(f) for f in sorted(sub.unit_faces.get(u, ()))]
    if not polys:
        return Polygon()
    merged = shapely.union_all(polys)
    return merged


def _repair(
    units: Sequence[Unit],
    options: RepairOptions,
    regions: Sequence[Region] | None = None,
) -> RepairResult:
    t0 = time.perf_counter()
    report = RepairReport()
    region_geoms = None
    if regions is not None:
        region_geoms = [clean_polygonal(r.geometry, 0.0) for r in regions]
    prep = _prepare(units, options, region_geoms or ())
    geoms, order, grid = prep
    if region_geoms is not None and grid > 0:
        region_geoms = [clean_polygonal(r, grid) for r in region_geoms]
    ids = [units[k].id for k in order]
    pockets = region_geoms is None and options.fill_boundary_pockets
    if pockets:
        region_geoms = [_pocket_hull(geoms, grid)]
    unit_region = None
    if region_geoms is not None:
        unit_region = []
        rtree = shapely.STRtree(np.array(region_geoms, dtype=object))
        for u, g in enumerate(geoms):
            cands = sorted(int(r) for r in rtree.query(g, predicate="intersects"))
            areas = [(g.intersection(region_geoms[r]).area, -r) for r in cands]
            best = max(areas) if areas else (0.0, 0)
            if best[0] <= 0:
                raise TilingError(f"unit {ids[u]!r} does not intersect any region")
            unit_region.append(-best[1])
    targets = {u: len(polygons_of(g)) for u, g in enumerate(geoms)}
    before = doctor(geoms, ids, grid=grid)
    report.counts_before = _counts(before)
    t1 = time.perf_counter()
    report.timings["diagnose"] = t1 - t0

    sub = _build(geoms, grid, region_geoms, unit_region)
    t2 = time.perf_counter()
    report.timings["arrangement"] = t2 - t1

    assign_order1(sub)
    report.overlap_stats = assign_overlaps(sub, targets)
    t3 = time.perf_counter()
    report.timings["overlaps"] = t3 - t2

    if options.fill_gaps:
        _fill_all(sub, ids, unit_region, options, report, pockets)
    else:
        for f in sub.faces():
            if sub.owner[f] is None and not sub.owner_set[f]:
                report.unfilled_gaps.append({"reason": "fill-disabled", "area": sub.area[f], "units": []})
    t4 = time.perf_counter()
    report.timings["gaps"] = t4 - t3

    residual = reconnect_in_subdivision(sub, targets, options.orphan_policy, list(range(len(geoms))))
    report.disconnected_units = [ids[u] for u in residual]
    t5 = time.perf_counter()
    report.timings["orphans"] = t5 - t4

    out_geoms = [_unit_geometry(sub, u) for u in range(len(geoms))]
    if options.queen_conversion is not None:
        out_geoms, qrep = rook_to_queen(out_geoms, options.queen_conversion)
        report.queen = {
            "converted": qrep.converted,
            "hulls": qrep.hulls,
            "crowded_hulls": [[ids[k] for k in h] for h in qrep.crowded_hulls],
            "skipped": [{"units": [ids[k] for k in s["units"]], "reason": s["reason"]} for s in qrep.skipped],
        }
    t6 = time.perf_counter()
    report.timings["queen"] = t6 - t5

    out_units = []
    for u, k in enumerate(order):
        src = units[k]
        out_units.append(Unit(src.id, out_geoms[u], dict(src.attributes)))
    # restore input order
    pos = {k: u for u, k in enumerate(order)}
    out_units = [out_units[pos[k]] for k in range(len(units))]
    kept = [u for u in out_units if not u.geometry.is_empty]
    after = doctor([u.geometry for u in kept], [u.id for u in kept])
    report.counts_after = _counts(after)
    graph = adjacency_graph(kept, check_overlaps=False)
    report.timings["adjacency"] = time.perf_counter() - t6
    report.timings["total"] = time.perf_counter() - t0
    return RepairResult(out_units, graph, report)


def _fill_all(
    sub: Subdivision, ids, unit_region, options: RepairOptions, report: RepairReport, pockets: bool = False
) -> None:
    filler = GapFiller()

    def edge_owner_for(fid):
        reg = sub.region[fid]
        out = {}
        for e in sub.edges(fid):
            g = sub.face_across(e)
            o = None if g is None else sub.owner[g]
            if o is not None and unit_region is not None and unit_region[o] != reg:
                o = None
            out[e] = o
        return out

    def adjacent_units(fid):
        return sorted({o for o in edge_owner_for(fid).values() if o is not None})

    def on_hull(edges):
        return any(sub.face_across(e) is None for e in edges)

    def exclude(entry, reason, edges):
        # pieces of a boundary pocket stay outside the tiling; anything else is a gap
        if pockets and on_hull(edges):
            report.notes.append(f"boundary pocket left open ({reason}, area {entry['area']:.6g})")
            return
        report.unfilled_gaps.append({**entry, "reason": reason})

    def fill_face(f, pocket=None):
        if pocket is None:
            pocket = pockets and on_hull(list(sub.edges(f)))
        adj = adjacent_units(f)
        reg = sub.region[f]
        entry = {"area": sub.area[f], "units": [ids[u] for u in adj], "region": reg}
        largest = max((sub.unit_area(u) for u in adj), default=0.0)
        if adj and sub.area[f] > options.gap_area_threshold * largest:
            exclude(entry, TOO_LARGE, list(sub.edges(f)))
            return
        if sub.holes[f]:
            parts = split_holes(sub.polygon(f)) if options.split_holed_gaps else None
            if parts is None:
                exclude(entry, NOT_SIMPLY_CONNECTED, list(sub.edges(f)))
                return
            report.notes.append(f"gap with {len(sub.holes[f])} hole(s) cut into {len(parts)} parts")
            sub.remove(f)
            new = [sub.add(piece_rings(p)[0], region=reg) for p in parts]
            for g in new:
                fill_face(g, pocket)
            return
        res = filler.fill(sub.rings[f], edge_owner_for(f))
        report.gap_depth = max(report.gap_depth, res.max_depth)
        report.notes.extend(res.notes)
        sub.remove(f)
        for r, owner in res.regions:
            sub.add(r, owner=owner, owner_set=frozenset((owner,)), region=reg)
            if pocket:
                report.pocket_area_filled += abs(signed_area(r))
        for r, reason in res.unfilled:
            g = sub.add(r, region=reg)
            exclude({"area": sub.area[g], "units": entry["units"], "region": reg}, reason, list(sub.edges(g)))

    keyed = []
    for f in _merge_gaps(sub):
        adj = adjacent_units(f)
        keyed.append((-sub.area[f], adj[0] if adj else math.inf, f))
    keyed.sort()
    for _, _, f in keyed:
        fill_face(f)


def _pocket_hull(geoms: Sequence[BaseGeometry], grid: float) -> Polygon:
    """Convex hull of the tiling with extra vertices facing the boundary vertices.

    Every outer boundary vertex that sees a hull edge head-on adds its
    projection onto that edge, so each unit along the boundary has nearby
    hull vertices to close against.
    """
    union = shapely.union_all(list(geoms))
    hull = shapely.geometry.polygon.orient(shapely.convex_hull(union), 1.0)
    hv = list(hull.exterior.coords)[:-1]
    verts = np.array([c for p in polygons_of(union) for c in list(p.exterior.coords)[:-1]], dtype=float)
    shapely.prepare(union)
    out = []
    for a, b in zip(hv, hv[1:] + hv[:1]):
        out.append(a)
        d = np.array([b[0] - a[0], b[1] - a[1]])
        t = ((verts - a) @ d) / (d @ d)
        sel = (t > 0) & (t < 1)
        if not sel.any():
            continue
        q = np.asarray(a) + t[sel, None] * d
        if grid > 0:
            # push outward by a grid step so rounding cannot cut into the tiling
            normal = np.array([d[1], -d[0]]) / math.hypot(*d)
            q = np.round((q + grid * normal) / grid) * grid
        v = verts[sel]
        # skip points that land on the vertex itself or next to an edge end
        ends = np.minimum(np.hypot(*(q - np.asarray(a)).T), np.hypot(*(q - np.asarray(b)).T))
        far = (np.hypot(*(q - v).T) > 2 * grid) & (ends > 8 * grid)
        if not far.any():
            continue
        q, v, ts = q[far], v[far], t[sel][far]
        lines = shapely.linestrings(np.stack([v, q], axis=1))
        clear = shapely.relate_pattern(lines, union, "F********")
        seen = {a, b}
        for k in np.argsort(ts, kind="stable"):
            c = (float(q[k, 0]), float(q[k, 1]))
            if clear[k] and c not in seen:
                seen.add(c)
                out.append(c)
    poly = Polygon(out)
    return poly if poly.is_valid else hull


def smart_repair(units: Sequence[Unit], options: RepairOptions = RepairOptions()) -> RepairResult:
    """Resolve overlaps and fill gaps so the result is a clean tiling.

    Returns the repaired units (input order, ids and attributes kept), their
    adjacency graph and a report of what was done and what was skipped.
    """
    return _repair(units, options)


def smart_repair_region_aware(
    units: Sequence[Unit], regions: Sequence[Region], options: RepairOptions = RepairOptions()
) -> RepairResult:
    """Repair so that every unit nests inside one region and the units cover the regions.

    Each unit belongs to the region it overlaps most.  Unit pieces outside
    all regions are dropped, and gaps are filled within each region, with
    arcs bordering other regions treated as exterior.
    """
    return _repair(units, options, regions=list(regions))


def quick_repair(units: Sequence[Unit], snap_tolerance: float | None = None) -> list[Unit]:
    """Baseline repair by pairwise greedy assignment.

    Each overlap between two units goes to whichever of the two shares more
    boundary with it; pairs are visited in ascending id order and later
    decisions overwrite earlier ones.  Each hole in the union goes whole to
    the unit sharing the most boundary with it.  The work is done on the
    faces of one noded arrangement, so neighbouring outputs share vertices
    exactly.
    """
    prep = _prepare(units, RepairOptions(snap_tolerance=snap_tolerance))
    geoms = list(prep.geoms)
    n = len(geoms)
    pieces = polygonize(noded_union(geoms, prep.grid))
    owners = compute_owner_sets(pieces, geoms)
    sub = Subdivision()
    members: dict[int, set[int]] = {}
    for p, o in zip(pieces, owners):
        rings = piece_rings(p)
        members[sub.add(rings[0], rings[1:], owner_set=o)] = set(o)

    def shared(comp, u):
        total = 0.0
        for f in comp:
            for e in sub.edges(f):
                g = sub.face_across(e)
                if g is not None and g not in comp and u in members[g]:
                    total += math.dist(*e)
        return total

    tree = shapely.STRtree(np.array(geoms, dtype=object))
    left, right = tree.query(np.array(geoms, dtype=object), predicate="intersects")
    for i, j in sorted({(int(a), int(b)) for a, b in zip(left, right) if a < b}):
        both = [f for f, m in members.items() if i in m and j in m]
        for comp in sub.unit_components(i, both):
            loser = i if shared(comp, j) > shared(comp, i) else j
            for f in comp:
                members[f].discard(loser)
    # holes are the bounded faces nobody covers, including ones whose rim touches itself
    empty = [f for f, m in members.items() if not m]
    for comp in sub.unit_components(-1, empty):
        near = set()
        for f in comp:
            for e in sub.edges(f):
                g = sub.face_across(e)
                if g is not None:
                    near |= members[g]
        lengths = {u: shared(comp, u) for u in sorted(near)}
        lengths = {u: v for u, v in lengths.items() if v > 0}
        if lengths:
            best = max(lengths, key=lambda u: (lengths[u], -u))
            for f in comp:
                members[f].add(best)
    faces_of: dict[int, list[Polygon]] = {u: [] for u in range(n)}
    for f, m in members.items():
        for u in m:
            faces_of[u].append(sub.polygon(f))
    geoms = [shapely.union_all(faces_of[u]) if faces_of[u] else Polygon() for u in range(n)]
    out = [None] * n
    for u, k in enumerate(prep.order):
        out[k] = Unit(units[k].id, geoms[u], dict(units[k].attributes))
    return out
