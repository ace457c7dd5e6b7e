"""Bounding-volume hierarchy over line segments for nearest-boundary queries."""

from __future__ import annotations

import numba
import numpy as np

LEAF_SIZE = 4


@numba.njit(cache=True)
def _build(segs, leaf_size):
    m = segs.shape[0]
    cx = 0.5 * (segs[:, 0] + segs[:, 2])
    cy = 0.5 * (segs[:, 1] + segs[:, 3])
    order = np.arange(m)
    cap = 2 * m + 1  # every leaf keeps at least one segment
    box = np.empty((cap, 4))
    child = -np.ones((cap, 2), dtype=np.int64)
    span = np.zeros((cap, 2), dtype=np.int64)
    stack = np.empty((128, 3), dtype=np.int64)
    sp = 0
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = m
    sp = 1
    nodes = 1
    while sp > 0:
        sp -= 1
        node = stack[sp, 0]
        lo = stack[sp, 1]
        hi = stack[sp, 2]
        x0 = np.inf
        y0 = np.inf
        x1 = -np.inf
        y1 = -np.inf
        cx0 = np.inf
        cy0 = np.inf
        cx1 = -np.inf
        cy1 = -np.inf
        for k in range(lo, hi):
            s = order[k]
            x0 = min(x0, segs[s, 0], segs[s, 2])
            x1 = max(x1, segs[s, 0], segs[s, 2])
            y0 = min(y0, segs[s, 1], segs[s, 3])
            y1 = max(y1, segs[s, 1], segs[s, 3])
            cx0 = min(cx0, cx[s])
            cx1 = max(cx1, cx[s])
            cy0 = min(cy0, cy[s])
            cy1 = max(cy1, cy[s])
        box[node, 0] = x0
        box[node, 1] = y0
        box[node, 2] = x1
        box[node, 3] = y1
        span[node, 0] = lo
        span[node, 1] = hi
        if hi - lo <= leaf_size:
            continue
        sub = order[lo:hi].copy()
        if cx1 - cx0 >= cy1 - cy0:
            keys = cx[sub]
        else:
            keys = cy[sub]
        sub = sub[np.argsort(keys, kind="mergesort")]
        order[lo:hi] = sub
        mid = (lo + hi) // 2
        left = nodes
        right = nodes + 1
        nodes += 2
        child[node, 0] = left
        child[node, 1] = right
        stack[sp, 0] = left
        stack[sp, 1] = lo
        stack[sp, 2] = mid
        stack[sp + 1, 0] = right
        stack[sp + 1, 1] = mid
        stack[sp + 1, 2] = hi
        sp += 2
    return order, box[:nodes].copy(), child[:nodes].copy(), span[:nodes].copy()


@numba.njit(cache=True, inline="always")
def _seg_dist2(px, py, x0, y0, x1, y1):
    dx = x1 - x0
    dy = y1 - y0
    L = dx * dx + dy * dy
    t = 0.0
    if L > 0.0:
        t = ((px - x0) * dx + (py - y0) * dy) / L
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
    qx = x0 + t * dx
    qy = y0 + t * dy
    return (px - qx) * (px - qx) + (py - qy) * (py - qy), qx, qy


@numba.njit(cache=True, inline="always")
def _box_dist2(px, py, box, node):
    dx = 0.0
    dy = 0.0
    if px < box[node, 0]:
        dx = box[node, 0] - px
    elif px > box[node, 2]:
        dx = px - box[node, 2]
    if py < box[node, 1]:
        dy = box[node, 1] - py
    elif py > box[node, 3]:
        dy = py - box[node, 3]
    return dx * dx + dy * dy


@numba.njit(cache=True)
def nearest_segment(px, py, segs, order, box, child, span):
    """Return ``(dist, qx, qy, seg_id)`` of the closest boundary point."""
    best = np.inf
    bx = 0.0
    by = 0.0
    bid = -1
    stack = np.empty(128, dtype=np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if _box_dist2(px, py, box, node) >= best:
            continue
        if child[node, 0] < 0:
            for k in range(span[node, 0], span[node, 1]):
                s = order[k]
                d2, qx, qy = _seg_dist2(px, py, segs[s, 0], segs[s, 1], segs[s, 2], segs[s, 3])
                if d2 < best:
                    best = d2
                    bx = qx
                    by = qy
                    bid = s
            continue
        a = child[node, 0]
        b = child[node, 1]
        da = _box_dist2(px, py, box, a)
        db = _box_dist2(px, py, box, b)
        # push the farther child first so the nearer one is popped next
        if da < db:
            stack[sp] = b
            stack[sp + 1] = a
        else:
            stack[sp] = a
            stack[sp + 1] = b
        sp += 2
    return np.sqrt(best), bx, by, bid


@numba.njit(cache=True)
def _nearest_many(pts, segs, order, box, child, span):
    n = pts.shape[0]
    dist = np.empty(n)
    near = np.empty((n, 2))
    ids = np.empty(n, dtype=np.int64)
    for i in range(n):
        d, qx, qy, s = nearest_segment(pts[i, 0], pts[i, 1], segs, order, box, child, span)
        dist[i] = d
        near[i, 0] = qx
        near[i, 1] = qy
        ids[i] = s
    return dist, near, ids


@numba.njit(cache=True)
def segments_in_box(x0, y0, x1, y1, order, box, child, span):
    """Ids of segments whose bounding box meets ``[x0, x1] x [y0, y1]``."""
    out = []
    stack = np.empty(128, dtype=np.int64)
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if box[node, 0] > x1 or box[node, 2] < x0 or box[node, 1] > y1 or box[node, 3] < y0:
            continue
        if child[node, 0] < 0:
            for k in range(span[node, 0], span[node, 1]):
                out.append(order[k])
            continue
        stack[sp] = child[node, 0]
        stack[sp + 1] = child[node, 1]
        sp += 2
    return np.array(out, dtype=np.int64)


class SegmentIndex:
    """Static BVH over segments ``(x0, y0, x1, y1)``."""

    def __init__(self, segs: np.ndarray):
        self.segs = np.ascontiguousarray(segs, dtype=np.float64)
        if self.segs.ndim != 2 or self.segs.shape[1] != 4 or not len(self.segs):
            raise ValueError("expected a non-empty (m, 4) segment array")
        self.order, self.box, self.child, self.span = _build(self.segs, LEAF_SIZE)

    @property
    def arrays(self):
        return self.segs, self.order, self.box, self.child, self.span

    def nearest(self, p) -> tuple[float, tuple[float, float], int]:
        d, qx, qy, s = nearest_segment(float(p[0]), float(p[1]), *self.arrays)
        return float(d), (float(qx), float(qy)), int(s)

    def candidates(self, x0, y0, x1, y1) -> np.ndarray:
        """Segments whose bounding box meets the query box (superset of true hits)."""
        ids = segments_in_box(float(x0), float(y0), float(x1), float(y1), *self.arrays[1:])
        s = self.segs[ids]
        keep = (
            (np.minimum(s[:, 0], s[:, 2]) <= x1) & (np.maximum(s[:, 0], s[:, 2]) >= x0)
            & (np.minimum(s[:, 1], s[:, 3]) <= y1) & (np.maximum(s[:, 1], s[:, 3]) >= y0)
        )
        return np.sort(ids[keep])

    def nearest_many(self, pts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=np.float64)
        return _nearest_many(pts, *self.arrays)


def brute_force_nearest(segs: np.ndarray, p) -> tuple[float, tuple[float, float], int]:
    """O(m) scan used as the oracle for :class:`SegmentIndex`."""
    segs = np.asarray(segs, dtype=float)
    px, py = float(p[0]), float(p[1])
    d = segs[:, 2:] - segs[:, :2]
    L = np.einsum("ij,ij->i", d, d)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(L > 0, ((px - segs[:, 0]) * d[:, 0] + (py - segs[:, 1]) * d[:, 1]) / L, 0.0)
    t = np.clip(t, 0.0, 1.0)
    q = segs[:, :2] + t[:, None] * d
    dist = np.hypot(q[:, 0] - px, q[:, 1] - py)
    k = int(np.argmin(dist))
    return float(dist[k]), (float(q[k, 0]), float(q[k, 1])), k
