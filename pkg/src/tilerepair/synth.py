"""Synthetic tilings, perturbations and random gaps for testing.

All randomness comes from numpy's PCG64 generator seeded through
``SeedSequence``, so streams are reproducible across platforms.  Each unit
draws from its own child stream, which keeps a unit's perturbation
independent of how many vertices the other units have.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial import Voronoi
from shapely.geometry import MultiPolygon, Polygon

from .geometry import (
    Coord,
    GeometryError,
    VertexClass,
    classify_vertex,
    is_simple_ring,
    segments_cross_properly,
    signed_area,
)
from .model import SubBoundary, Unit


def _rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(ss))


def generate_grid(nx: int, ny: int, cell: float = 1.0) -> tuple[list[Unit], set[frozenset]]:
    """An nx-by-ny grid of square cells and its rook adjacency pairs."""
    units = []
    for j in range(ny):
        for i in range(nx):
            x0, y0 = i * cell, j * cell
            poly = Polygon([(x0, y0), (x0 + cell, y0), (x0 + cell, y0 + cell), (x0, y0 + cell)])
            units.append(Unit(j * nx + i, poly, {"row": j, "col": i}))
    truth = set()
    for j in range(ny):
        for i in range(nx):
            k = j * nx + i
            if i + 1 < nx:
                truth.add(frozenset((k, k + 1)))
            if j + 1 < ny:
                truth.add(frozenset((k, k + nx)))
    return units, truth


def generate_voronoi(
    n_sites: int, seed: int, bbox: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
) -> tuple[list[Unit], set[frozenset]]:
    """Voronoi cells of uniform random sites, clipped to the box, and their adjacency.

    Sites are mirrored across the four box sides so every real cell is
    bounded by the box; neighbouring cells reference the same Voronoi
    vertices and so share coordinates exactly.
    """
    x0, y0, x1, y1 = bbox
    rng = _rng(seed)
    while True:
        sites = np.column_stack([rng.uniform(x0, x1, n_sites), rng.uniform(y0, y1, n_sites)])
        if len(np.unique(sites, axis=0)) == n_sites:
            break
    mirrored = [
        sites,
        np.column_stack([2 * x0 - sites[:, 0], sites[:, 1]]),
        np.column_stack([2 * x1 - sites[:, 0], sites[:, 1]]),
        np.column_stack([sites[:, 0], 2 * y0 - sites[:, 1]]),
        np.column_stack([sites[:, 0], 2 * y1 - sites[:, 1]]),
    ]
    vor = Voronoi(np.vstack(mirrored))
    verts = vor.vertices.copy()
    # pin vertices that sit on the box to the box exactly
    for col, lo, hi in ((0, x0, x1), (1, y0, y1)):
        span = hi - lo
        verts[np.abs(verts[:, col] - lo) < 1e-12 * span, col] = lo
        verts[np.abs(verts[:, col] - hi) < 1e-12 * span, col] = hi
    units = []
    for k in range(n_sites):
        region = vor.regions[vor.point_region[k]]
        ring = [tuple(map(float, verts[v])) for v in region]
        poly = Polygon(ring)
        if signed_area(ring) < 0:
            poly = Polygon(ring[::-1])
        units.append(Unit(k, poly, {"site_x": float(sites[k, 0]), "site_y": float(sites[k, 1])}))
    truth = set()
    for (p, q), rv in zip(vor.ridge_points, vor.ridge_vertices):
        if p < n_sites and q < n_sites and -1 not in rv:
            a, b = verts[rv[0]], verts[rv[1]]
            if math.dist(a, b) > 0:
                truth.add(frozenset((int(p), int(q))))
    return units, truth


@dataclass(frozen=True)
class Perturbation:
    """Per-vertex displacement: uniform in [-eps, eps]^2, or gaussian with sd eps clipped at 3 eps."""

    eps: float
    seed: int = 0
    mode: str = "uniform"
    shared: bool = False
    max_redraws: int = 100


def _displace(rng: np.random.Generator, n: int, p: Perturbation) -> np.ndarray:
    if p.mode == "uniform":
        return rng.uniform(-p.eps, p.eps, size=(n, 2))
    if p.mode == "gaussian":
        return np.clip(rng.normal(0.0, p.eps, size=(n, 2)), -3 * p.eps, 3 * p.eps)
    raise ValueError(f"unknown perturbation mode {p.mode!r}")


def _rebuild(poly: Polygon, rings: list[np.ndarray]) -> Polygon:
    return Polygon(rings[0], rings[1:])


def perturb(units: Sequence[Unit], p: Perturbation) -> list[Unit]:
    """Displace every vertex of every unit.

    With ``shared=False`` each unit moves its copy of a vertex independently,
    which opens gaps and overlaps.  With ``shared=True`` each distinct
    coordinate moves once, so a clean tiling stays clean.  A unit whose ring
    becomes invalid is redrawn whole, up to ``max_redraws`` times, after which
    GeometryError is raised.
    """
    children = np.random.SeedSequence(p.seed).spawn(len(units))
    shared_map: dict[Coord, np.ndarray] = {}
    if p.shared:
        allv = sorted({c for u in units for poly in _polys(u.geometry) for r in _rings(poly) for c in r})
        d = _displace(_rng(p.seed), len(allv), p)
        shared_map = {c: d[k] for k, c in enumerate(allv)}
    out = []
    for u, ss in zip(units, children):
        rng = _rng(ss)
        new_polys = []
        for poly in _polys(u.geometry):
            rings = [np.asarray(r, dtype=float) for r in _rings(poly)]
            for _ in range(p.max_redraws):
                if p.shared:
                    moved = [r + np.array([shared_map[tuple(c)] for c in r.tolist()]) for r in rings]
                else:
                    moved = [r + _displace(rng, len(r), p) for r in rings]
                cand = _rebuild(poly, moved)
                if cand.is_valid and cand.area > 0:
                    break
            else:
                raise GeometryError(f"unit {u.id!r}: no valid perturbation in {p.max_redraws} draws")
            new_polys.append(cand)
        geom = new_polys[0] if len(new_polys) == 1 else MultiPolygon(new_polys)
        out.append(Unit(u.id, geom, dict(u.attributes)))
    return out


def _polys(g) -> list[Polygon]:
    return [g] if isinstance(g, Polygon) else list(g.geoms)


def _rings(poly: Polygon) -> list[list[Coord]]:
    return [list(poly.exterior.coords)[:-1]] + [list(r.coords)[:-1] for r in poly.interiors]


def strip_gap(
    n_left: int = 8,
    n_right: int = 7,
    height: float = 15.0,
    width: float = 0.2,
    depth: float = 10.0,
) -> list[Unit]:
    """Two stacks of units facing each other across a thin wedge-shaped gap.

    The left stack has straight right sides on x = 0; the right stack's left
    sides follow a polyline bulging out to x = width at mid-height, so the gap
    closes at the top and bottom.  Every unit touches the gap, giving
    ``n_left + n_right`` sub-boundaries.  Each unit records its vertical span.
    """

    def g(y):
        return width * (1.0 - abs(2.0 * y / height - 1.0))

    units = []
    ys = [height * k / n_left for k in range(n_left + 1)]
    for k in range(n_left):
        poly = Polygon([(-depth, ys[k]), (0.0, ys[k]), (0.0, ys[k + 1]), (-depth, ys[k + 1])])
        units.append(Unit(f"L{k}", poly, {"side": "left", "y0": ys[k], "y1": ys[k + 1]}))
    zs = [height * k / n_right for k in range(n_right + 1)]
    for k in range(n_right):
        z0, z1 = zs[k], zs[k + 1]
        left_side = [(g(z1), z1)]
        if z0 < height / 2 < z1:
            left_side.append((width, height / 2))
        left_side.append((g(z0), z0))
        ring = [(g(z0), z0), (depth, z0), (depth, z1)] + left_side[:-1]
        units.append(Unit(f"R{k}", Polygon(ring), {"side": "right", "y0": z0, "y1": z1}))
    return units


def region_toy(eps: float = 0.02, seed: int = 0) -> tuple[list[Unit], list[tuple[str, Polygon]]]:
    """Four counties over a 4x3 block and twelve perturbed unit-square precincts.

    Counties are [0,2]x[0,1], [2,4]x[0,1], [0,2]x[1,3] and [2,4]x[1,3].
    """
    counties = [
        ("C0", Polygon([(0, 0), (2, 0), (2, 1), (0, 1)])),
        ("C1", Polygon([(2, 0), (4, 0), (4, 1), (2, 1)])),
        ("C2", Polygon([(0, 1), (2, 1), (2, 3), (0, 3)])),
        ("C3", Polygon([(2, 1), (4, 1), (4, 3), (2, 3)])),
    ]
    cells, _ = generate_grid(4, 3)
    precincts = [Unit(f"P{u.id}", u.geometry, dict(u.attributes)) for u in cells]
    return perturb(precincts, Perturbation(eps, seed)), counties


# ---------------------------------------------------------------------------
# random polygons and simplified gaps


def random_simple_polygon(rng: np.random.Generator, n: int) -> list[Coord]:
    """A random simple CCW polygon: random points untangled by 2-opt moves."""
    while True:
        pts = [tuple(map(float, p)) for p in rng.random((n, 2))]
        for _ in range(500):
            changed = False
            for i in range(n):
                for j in range(i + 2, n):
                    if i == 0 and j == n - 1:
                        continue
                    if segments_cross_properly(pts[i], pts[i + 1], pts[j], pts[(j + 1) % n]):
                        pts[i + 1 : j + 1] = pts[i + 1 : j + 1][::-1]
                        changed = True
            if not changed:
                break
        if is_simple_ring(pts):
            if signed_area(pts) < 0:
                pts.reverse()
            return pts


def random_simplified_gap(
    rng: np.random.Generator, m: int, max_vertices: int = 40, max_tries: int = 1000
) -> tuple[list[Coord], list[SubBoundary]]:
    """A simple polygon split into m outward-convex arcs owned by units 0..m-1.

    Corners sit at random angles and radii around the origin; each side
    between consecutive corners is a chain bowing into the polygon, so its
    interior vertices are reflex.
    """
    for _ in range(max_tries):
        ang = np.sort(rng.uniform(0, 2 * math.pi, m))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))
        if gaps.min() < 0.3 / m:
            continue
        rad = rng.uniform(0.5, 1.0, m)
        corners = [(float(r * math.cos(a)), float(r * math.sin(a))) for r, a in zip(rad, ang)]
        budget = max_vertices - m
        ring: list[Coord] = []
        starts = []
        for k in range(m):
            a, b = corners[k], corners[(k + 1) % m]
            starts.append(len(ring))
            ring.append(a)
            extra = int(rng.integers(0, 4))
            extra = min(extra, budget)
            budget -= extra
            if extra:
                sag = rng.uniform(0.02, 0.25) * math.dist(a, b)
                nx, ny = -(b[1] - a[1]), b[0] - a[0]
                ln = math.hypot(nx, ny)
                nx, ny = nx / ln, ny / ln
                us = np.sort(rng.uniform(0.1, 0.9, extra))
                for u in us:
                    h = sag * 4 * u * (1 - u)
                    ring.append((a[0] + u * (b[0] - a[0]) + h * nx, a[1] + u * (b[1] - a[1]) + h * ny))
        if not is_simple_ring(ring) or signed_area(ring) <= 0:
            continue
        n = len(ring)
        subs = [SubBoundary(starts[k], starts[(k + 1) % m], k) for k in range(m)]
        ok = True
        for s in subs:
            i = s.start
            while True:
                i = (i + 1) % n
                if i == s.end:
                    break
                if classify_vertex(ring, i) is not VertexClass.REFLEX:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return ring, subs
    raise RuntimeError("could not generate a simplified gap")
