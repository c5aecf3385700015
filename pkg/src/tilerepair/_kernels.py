"""Array kernels with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``TILEREPAIR_NO_NUMBA`` is not
set to a true value.  Both paths are importable directly (``*_numpy`` and
``*_numba``) so they can be tested and benchmarked against each other.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("TILEREPAIR_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by TILEREPAIR_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


# --------------------------------------------------------------------------
# polyline-to-polyline minimum distance


def min_polyline_distance_numpy(a: np.ndarray, b: np.ndarray) -> float:
    """Minimum distance between two open polylines given as (n, 2) arrays."""
    a0, a1 = a[:-1, None, :], a[1:, None, :]
    b0, b1 = b[None, :-1, :], b[None, 1:, :]
    d = np.minimum(
        np.minimum(_pt_seg_np(a0, b0, b1), _pt_seg_np(a1, b0, b1)),
        np.minimum(_pt_seg_np(b0, a0, a1), _pt_seg_np(b1, a0, a1)),
    )
    cross = _proper_cross_np(a0, a1, b0, b1)
    d = np.where(cross, 0.0, d)
    return float(d.min())


def _pt_seg_np(p, a, b):
    ab = b - a
    den = (ab * ab).sum(-1)
    t = np.where(den > 0, ((p - a) * ab).sum(-1) / np.where(den > 0, den, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.sqrt(((p - proj) ** 2).sum(-1))


def _cross_np(o, a, b):
    return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (
        b[..., 0] - o[..., 0]
    )


def _proper_cross_np(a0, a1, b0, b1):
    d1 = _cross_np(a0, a1, b0)
    d2 = _cross_np(a0, a1, b1)
    d3 = _cross_np(b0, b1, a0)
    d4 = _cross_np(b0, b1, a1)
    return (d1 * d2 < 0) & (d3 * d4 < 0)


@njit(cache=True)
def _pt_seg_nb(px, py, ax, ay, bx, by):
    dx = bx - ax
    dy = by - ay
    den = dx * dx + dy * dy
    t = 0.0
    if den > 0.0:
        t = ((px - ax) * dx + (py - ay) * dy) / den
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    qx = ax + t * dx - px
    qy = ay + t * dy - py
    return np.sqrt(qx * qx + qy * qy)


@njit(cache=True)
def _cross_nb(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


@njit(cache=True)
def min_polyline_distance_numba(a, b):
    best = np.inf
    for i in range(a.shape[0] - 1):
        ax, ay, bx, by = a[i, 0], a[i, 1], a[i + 1, 0], a[i + 1, 1]
        for j in range(b.shape[0] - 1):
            cx, cy, dx, dy = b[j, 0], b[j, 1], b[j + 1, 0], b[j + 1, 1]
            d1 = _cross_nb(ax, ay, bx, by, cx, cy)
            d2 = _cross_nb(ax, ay, bx, by, dx, dy)
            d3 = _cross_nb(cx, cy, dx, dy, ax, ay)
            d4 = _cross_nb(cx, cy, dx, dy, bx, by)
            if d1 * d2 < 0.0 and d3 * d4 < 0.0:
                return 0.0
            d = min(
                _pt_seg_nb(ax, ay, cx, cy, dx, dy),
                _pt_seg_nb(bx, by, cx, cy, dx, dy),
                _pt_seg_nb(cx, cy, ax, ay, bx, by),
                _pt_seg_nb(dx, dy, ax, ay, bx, by),
            )
            if d < best:
                best = d
    return best


# --------------------------------------------------------------------------
# batched point-in-ring (even-odd rule; boundary points are unspecified)


def points_in_ring_numpy(pts: np.ndarray, ring: np.ndarray) -> np.ndarray:
    x, y = pts[:, 0:1], pts[:, 1:2]
    x0, y0 = ring[:, 0][None, :], ring[:, 1][None, :]
    r1 = np.roll(ring, -1, axis=0)
    x1, y1 = r1[:, 0][None, :], r1[:, 1][None, :]
    straddle = (y0 > y) != (y1 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    hits = straddle & (x < xcross)
    return (hits.sum(axis=1) % 2) == 1


@njit(cache=True)
def points_in_ring_numba(pts, ring):
    n = ring.shape[0]
    out = np.zeros(pts.shape[0], dtype=np.bool_)
    for k in range(pts.shape[0]):
        x = pts[k, 0]
        y = pts[k, 1]
        inside = False
        for i in range(n):
            x0, y0 = ring[i, 0], ring[i, 1]
            x1, y1 = ring[(i + 1) % n, 0], ring[(i + 1) % n, 1]
            if (y0 > y) != (y1 > y):
                xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
                if x < xc:
                    inside = not inside
        out[k] = inside
    return out


# --------------------------------------------------------------------------
# sampled segment clearance: does the open segment p->q avoid the ring
# boundary (except at its endpoints) and run through the ring interior?


def clear_segments_numpy(p: np.ndarray, q: np.ndarray, ring: np.ndarray, tol: float) -> np.ndarray:
    n = ring.shape[0]
    e0 = ring
    e1 = np.roll(ring, -1, axis=0)
    blocked = np.zeros(p.shape[0], dtype=bool)
    # process in chunks to bound memory
    step = max(1, 200000 // max(n, 1))
    for s in range(0, p.shape[0], step):
        pp = p[s : s + step, None, :]
        qq = q[s : s + step, None, :]
        a = e0[None, :, :]
        b = e1[None, :, :]
        r = qq - pp
        sv = b - a
        den = r[..., 0] * sv[..., 1] - r[..., 1] * sv[..., 0]
        ap = a - pp
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (ap[..., 0] * sv[..., 1] - ap[..., 1] * sv[..., 0]) / den
            u = (ap[..., 0] * r[..., 1] - ap[..., 1] * r[..., 0]) / den
        rlen2 = (r * r).sum(-1)
        proper = (den != 0) & (t > tol) & (t < 1 - tol) & (u >= -tol) & (u <= 1 + tol)
        # parallel edges: blocked if collinear and overlapping the open segment
        par = den == 0
        cr = ap[..., 0] * r[..., 1] - ap[..., 1] * r[..., 0]
        colin = par & (np.abs(cr) <= tol * rlen2)
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = (ap * r).sum(-1) / rlen2
            tb = ((b - pp) * r).sum(-1) / rlen2
        lo = np.minimum(ta, tb)
        hi = np.maximum(ta, tb)
        overl = colin & (hi > tol) & (lo < 1 - tol) & (np.minimum(hi, 1) - np.maximum(lo, 0) > tol)
        blocked[s : s + step] = (proper | overl).any(axis=1)
    mid = 0.5 * (p + q)
    inside = points_in_ring_numpy(mid, ring)
    return ~blocked & inside


@njit(cache=True)
def clear_segments_numba(p, q, ring, tol):
    n = ring.shape[0]
    m = p.shape[0]
    out = np.zeros(m, dtype=np.bool_)
    mid = np.empty((m, 2))
    for k in range(m):
        mid[k, 0] = 0.5 * (p[k, 0] + q[k, 0])
        mid[k, 1] = 0.5 * (p[k, 1] + q[k, 1])
    inside = points_in_ring_numba(mid, ring)
    for k in range(m):
        if not inside[k]:
            continue
        px, py = p[k, 0], p[k, 1]
        rx, ry = q[k, 0] - px, q[k, 1] - py
        rlen2 = rx * rx + ry * ry
        ok = True
        for i in range(n):
            ax, ay = ring[i, 0], ring[i, 1]
            bx, by = ring[(i + 1) % n, 0], ring[(i + 1) % n, 1]
            sx, sy = bx - ax, by - ay
            den = rx * sy - ry * sx
            apx, apy = ax - px, ay - py
            if den != 0.0:
                t = (apx * sy - apy * sx) / den
                u = (apx * ry - apy * rx) / den
                if t > tol and t < 1.0 - tol and u >= -tol and u <= 1.0 + tol:
                    ok = False
                    break
            else:
                cr = apx * ry - apy * rx
                if abs(cr) <= tol * rlen2:
                    ta = (apx * rx + apy * ry) / rlen2
                    tb = ((bx - px) * rx + (by - py) * ry) / rlen2
                    lo = min(ta, tb)
                    hi = max(ta, tb)
                    if hi > tol and lo < 1.0 - tol and min(hi, 1.0) - max(lo, 0.0) > tol:
                        ok = False
                        break
        out[k] = ok
    return out


if HAVE_NUMBA:
    min_polyline_distance = min_polyline_distance_numba
    points_in_ring = points_in_ring_numba
    clear_segments = clear_segments_numba
else:
    min_polyline_distance = min_polyline_distance_numpy
    points_in_ring = points_in_ring_numpy
    clear_segments = clear_segments_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
