"""Triangulation and geodesic shortest paths inside simple polygons.

Vertices are addressed by index into a counter-clockwise ring.  Shortest
paths are computed with the funnel algorithm over the dual tree of an
ear-clipping triangulation and are canonicalised so that every polygon
vertex lying on a path segment is listed explicitly.
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from typing import Sequence

from .geometry import (
    Coord,
    GeometryError,
    VertexClass,
    classify_vertex,
    orient2d,
    path_length,
    segments_cross_properly,
    signed_area,
    strictly_inside_segment,
)

Triangle = tuple[int, int, int]


def _in_closed_triangle(p: Coord, a: Coord, b: Coord, c: Coord) -> bool:
    return orient2d(a, b, p) >= 0 and orient2d(b, c, p) >= 0 and orient2d(c, a, p) >= 0


def triangulate(ring: Sequence[Coord]) -> list[Triangle]:
    """Ear-clipping triangulation of a CCW simple ring into n - 2 triangles.

    Only strictly convex ears are clipped, so collinear vertices never end up
    in zero-area triangles.
    """
    n = len(ring)
    if n < 3:
        raise GeometryError("cannot triangulate fewer than 3 vertices")
    if signed_area(ring) <= 0:
        raise GeometryError("ring must be counter-clockwise")
    prev = [(i - 1) % n for i in range(n)]
    nxt = [(i + 1) % n for i in range(n)]
    convex = [orient2d(ring[prev[i]], ring[i], ring[nxt[i]]) > 0 for i in range(n)]
    alive = set(range(n))
    tris: list[Triangle] = []

    def is_ear(i: int) -> bool:
        if not convex[i]:
            return False
        a, b, c = ring[prev[i]], ring[i], ring[nxt[i]]
        for v in alive:
            if v == i or v == prev[i] or v == nxt[i] or convex[v]:
                continue
            if _in_closed_triangle(ring[v], a, b, c):
                return False
        return True

    i = 0
    remaining = n
    guard = 0
    while remaining > 3:
        if is_ear(i):
            p, q = prev[i], nxt[i]
            tris.append((p, i, q))
            alive.discard(i)
            nxt[p] = q
            prev[q] = p
            remaining -= 1
            for v in (p, q):
                convex[v] = orient2d(ring[prev[v]], ring[v], ring[nxt[v]]) > 0
            i = p
            guard = 0
        else:
            i = nxt[i]
            guard += 1
            if guard > remaining:
                raise GeometryError("no ear found; ring is not simple")
    a = next(iter(alive))
    tri = (prev[a], a, nxt[a])
    if orient2d(ring[tri[0]], ring[tri[1]], ring[tri[2]]) <= 0:
        raise GeometryError("degenerate final triangle")
    tris.append(tri)
    return tris


class PolygonRouter:
    """Caches a triangulation of one ring and answers shortest-path queries."""

    def __init__(self, ring: Sequence[Coord]):
        self.ring = list(ring)
        self.n = len(self.ring)
        self.triangles = triangulate(self.ring)
        self._index = {p: i for i, p in enumerate(self.ring)}
        self._vertex_tris: list[list[int]] = [[] for _ in range(self.n)]
        edge_tris: dict[tuple[int, int], list[int]] = {}
        for t, tri in enumerate(self.triangles):
            for v in tri:
                self._vertex_tris[v].append(t)
            for k in range(3):
                u, w = tri[k], tri[(k + 1) % 3]
                edge_tris.setdefault((min(u, w), max(u, w)), []).append(t)
        self._adj: list[list[tuple[int, int, int]]] = [[] for _ in self.triangles]
        for (u, w), ts in edge_tris.items():
            if len(ts) == 2:
                t0, t1 = ts
                self._adj[t0].append((t1, u, w))
                self._adj[t1].append((t0, u, w))

    def index_of(self, p: Coord | int) -> int:
        if isinstance(p, int):
            return p
        try:
            return self._index[(float(p[0]), float(p[1]))]
        except KeyError as exc:
            raise GeometryError(f"{p} is not a polygon vertex") from exc

    def _sleeve(self, a: int, b: int) -> list[int]:
        targets = set(self._vertex_tris[b])
        parent: dict[int, int] = {}
        queue = deque()
        for t in self._vertex_tris[a]:
            parent[t] = -1
            queue.append(t)
        hit = -1
        while queue:
            t = queue.popleft()
            if t in targets:
                hit = t
                break
            for u, _, _ in self._adj[t]:
                if u not in parent:
                    parent[u] = t
                    queue.append(u)
        if hit < 0:
            raise GeometryError("dual tree is disconnected")
        seq = [hit]
        while parent[seq[-1]] >= 0:
            seq.append(parent[seq[-1]])
        seq.reverse()
        # trim leading triangles that still contain a
        while len(seq) > 1 and a in self.triangles[seq[1]]:
            seq.pop(0)
        while len(seq) > 1 and b in self.triangles[seq[-2]]:
            seq.pop()
        return seq

    def _portals(self, a: int, b: int, seq: list[int]) -> list[tuple[int, int]]:
        portals = [(a, a)]
        for t0, t1 in zip(seq, seq[1:]):
            tri = self.triangles[t0]
            shared = set(tri) & set(self.triangles[t1])
            # in a CCW triangle (w, u, v) with shared edge (u, v): right = u, left = v
            for k in range(3):
                u, v = tri[(k + 1) % 3], tri[(k + 2) % 3]
                if {u, v} == shared:
                    portals.append((v, u))
                    break
        portals.append((b, b))
        return portals

    def shortest_path_indices(self, a: Coord | int, b: Coord | int) -> list[int]:
        a, b = self.index_of(a), self.index_of(b)
        if a == b:
            raise GeometryError("shortest path endpoints coincide")
        if (a + 1) % self.n == b or (b + 1) % self.n == a:
            return [a, b]
        seq = self._sleeve(a, b)
        if len(seq) == 1:
            return self._canonical([a, b])
        portals = self._portals(a, b, seq)
        return self._canonical(self._funnel(portals))

    def shortest_path(self, a: Coord | int, b: Coord | int) -> list[Coord]:
        return [self.ring[i] for i in self.shortest_path_indices(a, b)]

    def _funnel(self, portals: list[tuple[int, int]]) -> list[int]:
        P = self.ring
        apex, left, right = portals[0][0], portals[0][0], portals[0][1]
        apex_i = left_i = right_i = 0
        path = [apex]
        i = 1
        while i < len(portals):
            nl, nr = portals[i]
            # tighten the right side
            if orient2d(P[apex], P[right], P[nr]) >= 0:
                if apex == right or orient2d(P[apex], P[left], P[nr]) < 0:
                    right, right_i = nr, i
                else:
                    apex, apex_i = left, left_i
                    path.append(apex)
                    right, right_i = apex, apex_i
                    i = apex_i + 1
                    continue
            # tighten the left side
            if orient2d(P[apex], P[left], P[nl]) <= 0:
                if apex == left or orient2d(P[apex], P[right], P[nl]) > 0:
                    left, left_i = nl, i
                else:
                    apex, apex_i = right, right_i
                    path.append(apex)
                    left, left_i = apex, apex_i
                    i = apex_i + 1
                    continue
            i += 1
        end = portals[-1][0]
        if path[-1] != end:
            path.append(end)
        return path

    def _canonical(self, path: list[int]) -> list[int]:
        """Insert every polygon vertex that lies inside a path segment."""
        P = self.ring
        # collinear funnel steps can repeat the apex
        path = [v for k, v in enumerate(path) if k == 0 or v != path[k - 1]]
        out = [path[0]]
        for u, w in zip(path, path[1:]):
            pu, pw = P[u], P[w]
            on = [v for v in range(self.n) if v != u and v != w and strictly_inside_segment(P[v], pu, pw)]
            on.sort(key=lambda v: math.dist(pu, P[v]))
            out.extend(on)
            out.append(w)
        return out


def shortest_path(ring: Sequence[Coord], a: Coord | int, b: Coord | int) -> list[Coord]:
    """Geodesic shortest path between two vertices of a CCW simple ring."""
    return PolygonRouter(ring).shortest_path(a, b)


def arc_indices(n: int, start: int, end: int) -> list[int]:
    """Indices from start to end following the ring forward."""
    out = [start]
    k = start
    while k != end:
        k = (k + 1) % n
        out.append(k)
    return out


def is_outward_convex(ring: Sequence[Coord], start: int, end: int) -> bool:
    """True iff every interior vertex of the arc start..end is reflex."""
    idx = arc_indices(len(ring), start, end)
    return all(classify_vertex(ring, k) is VertexClass.REFLEX for k in idx[1:-1])


def convexify_sub_boundary(
    ring: Sequence[Coord], start: int, end: int, router: PolygonRouter | None = None
) -> tuple[list[list[Coord]], list[Coord]]:
    """Carve the pockets between the arc start..end and its shortest path.

    Returns the carved pocket rings (CCW, possibly none) and the replacement
    arc.  Each pocket is bounded by a stretch of the arc and the matching
    stretch of the path.
    """
    pockets_idx, sp = carve_pockets(ring, start, end, router)
    return [[ring[i] for i in p] for p in pockets_idx], [ring[i] for i in sp]


def carve_pockets(
    ring: Sequence[Coord], start: int, end: int, router: PolygonRouter | None = None
) -> tuple[list[list[int]], list[int]]:
    n = len(ring)
    arc = arc_indices(n, start, end)
    if len(arc) == 2 or is_outward_convex(ring, start, end):
        return [], arc
    router = router or PolygonRouter(ring)
    sp = router.shortest_path_indices(start, end)
    pos = {v: k for k, v in enumerate(arc)}
    touches = [(t, pos[v]) for t, v in enumerate(sp) if v in pos]
    pockets: list[list[int]] = []
    for (t1, p1), (t2, p2) in zip(touches, touches[1:]):
        if p2 <= p1:
            raise GeometryError("shortest path revisits its own arc")
        if t2 == t1 + 1 and p2 == p1 + 1:
            continue
        pocket = arc[p1 : p2 + 1] + sp[t1 + 1 : t2][::-1]
        if len(pocket) >= 3 and signed_area([ring[i] for i in pocket]) > 0:
            pockets.append(pocket)
    return pockets, sp


def visibility_graph_path(ring: Sequence[Coord], a: int, b: int) -> tuple[float, list[int]]:
    """Dijkstra over the vertex visibility graph of a closed simple polygon.

    An independent route to the geodesic distance: two vertices see each
    other when the closed segment between them stays inside the closed
    polygon.
    """
    n = len(ring)
    vis = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = _visible(ring, i, j)
            vis[i][j] = vis[j][i] = v
    dist = [math.inf] * n
    prev = [-1] * n
    dist[a] = 0.0
    heap = [(0.0, a)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == b:
            break
        for w in range(n):
            if vis[u][w]:
                nd = d + math.dist(ring[u], ring[w])
                if nd < dist[w]:
                    dist[w] = nd
                    prev[w] = u
                    heapq.heappush(heap, (nd, w))
    path = [b]
    while path[-1] != a:
        path.append(prev[path[-1]])
    return dist[b], path[::-1]


def _visible(ring: Sequence[Coord], i: int, j: int) -> bool:
    n = len(ring)
    if (i + 1) % n == j or (j + 1) % n == i:
        return True
    p, q = ring[i], ring[j]
    for k in range(n):
        c, d = ring[k], ring[(k + 1) % n]
        if segments_cross_properly(p, q, c, d):
            return False
    # split the segment at every vertex on it and test each piece's midpoint
    cuts = [p, q] + [ring[k] for k in range(n) if strictly_inside_segment(ring[k], p, q)]
    cuts.sort(key=lambda c: math.dist(p, c))
    for u, w in zip(cuts, cuts[1:]):
        mid = (0.5 * (u[0] + w[0]), 0.5 * (u[1] + w[1]))
        if not _in_closed_polygon(mid, ring):
            return False
    return True


def _in_closed_polygon(p: Coord, ring: Sequence[Coord]) -> bool:
    n = len(ring)
    inside = False
    for k in range(n):
        a, b = ring[k], ring[(k + 1) % n]
        if orient2d(a, b, p) == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) and min(
            a[1], b[1]
        ) <= p[1] <= max(a[1], b[1]):
            return True
        if (a[1] > p[1]) != (b[1] > p[1]):
            o = orient2d(a, b, p)
            if (o > 0) == (b[1] > a[1]):
                inside = not inside
    return inside


def path_vertices_are_polygon_vertices(ring: Sequence[Coord], path: Sequence[Coord]) -> bool:
    verts = set(ring)
    return all(p in verts for p in path)


__all__ = [
    "PolygonRouter",
    "arc_indices",
    "carve_pockets",
    "convexify_sub_boundary",
    "is_outward_convex",
    "path_length",
    "path_vertices_are_polygon_vertices",
    "shortest_path",
    "triangulate",
    "visibility_graph_path",
]
