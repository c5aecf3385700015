"""Strong mutual visibility between gap sub-boundaries, and bridges.

Two outward-convex arcs of a simple polygon are strongly mutually visible
exactly when the shortest path from the end of the first to the start of the
second and the shortest path from the end of the second to the start of the
first are disjoint.  ``sampled_visibility`` is an independent sampling check
used to validate that criterion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .geometry import Coord, GeometryError, line_intersection, segment_intersection, signed_area
from .paths import PolygonRouter, arc_indices


def _check_pair(n: int, sub_i: tuple[int, int], sub_j: tuple[int, int]) -> None:
    si, ei = sub_i
    sj, ej = sub_j
    shared = {si, ei} & {sj, ej}
    if shared:
        raise GeometryError("sub-boundaries are adjacent; visibility is defined for non-adjacent pairs")


def paths_disjoint(p: Sequence[Coord], q: Sequence[Coord]) -> bool:
    if set(p) & set(q):
        return False
    for a, b in zip(p, p[1:]):
        for c, d in zip(q, q[1:]):
            if segment_intersection((a, b), (c, d)).kind != "empty":
                return False
    return True


def strongly_mutually_visible(
    ring: Sequence[Coord],
    sub_i: tuple[int, int],
    sub_j: tuple[int, int],
    router: PolygonRouter | None = None,
) -> bool:
    """Disjointness test on the two cross shortest paths."""
    _check_pair(len(ring), sub_i, sub_j)
    router = router or PolygonRouter(ring)
    alpha1 = router.shortest_path(sub_i[1], sub_j[0])
    alpha2 = router.shortest_path(sub_j[1], sub_i[0])
    return paths_disjoint(alpha1, alpha2)


def pair_distance(arc_a: Sequence[Coord], arc_b: Sequence[Coord]) -> float:
    """Minimum Euclidean distance between two polylines."""
    a = np.asarray(arc_a, dtype=float)
    b = np.asarray(arc_b, dtype=float)
    return float(_kernels.min_polyline_distance(a, b))


def loops_from_walk(walk: Sequence[Coord]) -> list[list[Coord]]:
    """Split a closed walk into its simple loops of positive area.

    The walk may touch itself at vertices and may retrace edges; retraced
    spikes and zero-area loops are discarded.
    """
    pts: list[Coord] = []
    for p in walk:
        if not pts or pts[-1] != p:
            pts.append(p)
    while len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()
    if len(pts) < 3:
        return []
    pts.append(pts[0])
    loops: list[list[Coord]] = []
    stack: list[Coord] = []
    where: dict[Coord, int] = {}
    for p in pts:
        if p in where:
            k = where[p]
            loop = stack[k:]
            for q in loop[1:]:
                del where[q]
            del stack[k + 1 :]
            if len(loop) >= 3 and signed_area(loop) > 0:
                loops.append(loop)
        else:
            where[p] = len(stack)
            stack.append(p)
    return loops


def _first_crossing(beta1: list[Coord], beta2: list[Coord]) -> tuple[list[Coord], list[Coord], int, int]:
    pos2 = {p: k for k, p in enumerate(beta2)}
    for k, p in enumerate(beta1):
        if p in pos2:
            return beta1, beta2, k, pos2[p]
    for k in range(len(beta1) - 1):
        a, b = beta1[k], beta1[k + 1]
        for m in range(len(beta2) - 1):
            c, d = beta2[m], beta2[m + 1]
            inter = segment_intersection((a, b), (c, d))
            if inter.kind == "point":
                x = inter.geometry[0]
                b1 = beta1[: k + 1] + [x] + beta1[k + 1 :]
                b2 = beta2[: m + 1] + [x] + beta2[m + 1 :]
                return b1, b2, k + 1, m + 1
            if inter.kind == "overlap":
                raise GeometryError("bridge paths overlap along a segment")
    raise GeometryError("bridge paths do not cross")


@dataclass
class Bridge:
    """Regions produced by bridging a strongly mutually visible pair."""

    regions_i: list[list[Coord]]
    regions_j: list[list[Coord]]
    remaining: list[list[Coord]]
    crossing: Coord
    beta1: list[Coord]
    beta2: list[Coord]


def build_bridge(
    ring: Sequence[Coord],
    sub_i: tuple[int, int],
    sub_j: tuple[int, int],
    router: PolygonRouter | None = None,
) -> Bridge:
    """Cut the gap along start-start and end-end shortest paths."""
    _check_pair(len(ring), sub_i, sub_j)
    router = router or PolygonRouter(ring)
    n = len(ring)
    si, ei = sub_i
    sj, ej = sub_j
    beta1 = router.shortest_path(si, sj)
    beta2 = router.shortest_path(ei, ej)
    beta1, beta2, x1, x2 = _first_crossing(beta1, beta2)
    arc = lambda a, b: [ring[k] for k in arc_indices(n, a, b)]
    walk_i = arc(si, ei) + beta2[: x2 + 1] + beta1[: x1 + 1][::-1]
    walk_j = arc(sj, ej) + beta2[x2:][::-1] + beta1[x1:]
    walk_g1 = arc(ei, sj) + beta1[x1:][::-1] + beta2[: x2 + 1][::-1]
    walk_g2 = arc(ej, si) + beta1[: x1 + 1] + beta2[x2:]
    remaining = loops_from_walk(walk_g1) + loops_from_walk(walk_g2)
    return Bridge(
        regions_i=loops_from_walk(walk_i),
        regions_j=loops_from_walk(walk_j),
        remaining=remaining,
        crossing=beta1[x1],
        beta1=beta1,
        beta2=beta2,
    )


def _sample_arc(arc: Sequence[Coord], count: int) -> np.ndarray:
    pts = np.asarray(arc, dtype=float)
    seg = np.sqrt(((pts[1:] - pts[:-1]) ** 2).sum(1))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    s = (np.arange(count) + 0.5) / count * total
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg) - 1)
    t = (s - cum[k]) / np.where(seg[k] > 0, seg[k], 1.0)
    return pts[k] + t[:, None] * (pts[k + 1] - pts[k])


def sampled_visibility(
    ring: Sequence[Coord],
    sub_i: tuple[int, int],
    sub_j: tuple[int, int],
    samples: int = 50,
    tol: float = 1e-9,
) -> int:
    """Count sampled point pairs on the two arcs joined by a clear segment.

    Points are taken at the midpoints of ``samples`` equal arc-length bins on
    each arc; a pair counts when the open segment between them lies in the
    polygon interior and touches the boundary only at its endpoints.
    """
    n = len(ring)
    arc_i = [ring[k] for k in arc_indices(n, *sub_i)]
    arc_j = [ring[k] for k in arc_indices(n, *sub_j)]
    a = _sample_arc(arc_i, samples)
    b = _sample_arc(arc_j, samples)
    p = np.repeat(a, samples, axis=0)
    q = np.tile(b, (samples, 1))
    poly = np.asarray(ring, dtype=float)
    ok = _kernels.clear_segments(p, q, poly, tol)
    return int(np.count_nonzero(ok))


def gap_diameter(ring: Sequence[Coord]) -> float:
    xs = [p[0] for p in ring]
    ys = [p[1] for p in ring]
    return math.hypot(max(xs) - min(xs), max(ys) - min(ys))


__all__ = [
    "Bridge",
    "build_bridge",
    "gap_diameter",
    "line_intersection",
    "loops_from_walk",
    "pair_distance",
    "paths_disjoint",
    "sampled_visibility",
    "strongly_mutually_visible",
]
