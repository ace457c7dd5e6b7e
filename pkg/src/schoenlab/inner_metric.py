"""Inner distances in polygonal domains.

Geodesics come from a constrained Delaunay triangulation of the domain and
the funnel (string-pulling) algorithm along a dual channel. A Dijkstra
search on a uniform grid serves as an independent oracle.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from functools import cached_property

import numba
import numpy as np
import shapely
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order

from .cantor_comb import CombParams, floor_midpoints, t1_domain_polygon
from .exact_geometry import JordanPolygon
from .spatial import SegmentIndex

DEFAULT_BOX = (-4.0, -4.0, 5.0, 5.0)
ANCHOR = (0.5, 2.0)


class Location(IntEnum):
    OUTSIDE = -1
    BOUNDARY = 0
    INSIDE = 1


class BoundaryPointError(ValueError):
    """Raised by :meth:`PolyDomain.contains` for a point on the boundary."""


class DisconnectedQueryError(ValueError):
    pass


class GridResolutionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# point location


@numba.njit(cache=True)
def _bucket_edges(segs, y0, dy, nb):
    counts = np.zeros(nb + 1, dtype=np.int64)
    m = segs.shape[0]
    lo = np.empty(m, dtype=np.int64)
    hi = np.empty(m, dtype=np.int64)
    for e in range(m):
        a = min(segs[e, 1], segs[e, 3])
        b = max(segs[e, 1], segs[e, 3])
        # one bucket of slack on each side absorbs rounding in the division
        lo[e] = min(max(int((a - y0) / dy) - 1, 0), nb - 1)
        hi[e] = min(max(int((b - y0) / dy) + 1, 0), nb - 1)
        for k in range(lo[e], hi[e] + 1):
            counts[k + 1] += 1
    start = np.cumsum(counts)
    fill = start[:-1].copy()
    items = np.empty(start[-1], dtype=np.int64)
    for e in range(m):
        for k in range(lo[e], hi[e] + 1):
            items[fill[k]] = e
            fill[k] += 1
    return start, items


@numba.njit(cache=True)
def _ray_parity(pts, segs, start, items, y0, dy, nb):
    """Parity of crossings of a rightward ray; 0/1, 2 = on boundary, 3 = undecided."""
    n = pts.shape[0]
    out = np.empty(n, dtype=np.int8)
    eps = 4.0 * 2.220446049250313e-16
    for i in range(n):
        px = pts[i, 0]
        py = pts[i, 1]
        k = int(np.floor((py - y0) / dy))
        if k < 0 or k >= nb:
            # beyond every edge's y-range only if strictly outside
            if py < y0 or py > y0 + nb * dy:
                out[i] = 0
                continue
            k = min(max(k, 0), nb - 1)
        parity = 0
        state = -1
        for t in range(start[k], start[k + 1]):
            e = items[t]
            ax = segs[e, 0]
            ay = segs[e, 1]
            bx = segs[e, 2]
            by = segs[e, 3]
            if ay == by:
                if py == ay and min(ax, bx) <= px <= max(ax, bx):
                    state = 2
                    break
                continue
            if ay > by:
                ax, bx = bx, ax
                ay, by = by, ay
            if py < ay or py > by:
                continue
            if ax == bx:
                if px == ax:
                    state = 2
                    break
                if px < ax and py < by:
                    parity ^= 1
                continue
            cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            bound = eps * (abs(bx - ax) * abs(py - ay) + abs(by - ay) * abs(px - ax))
            if abs(cross) <= bound:
                state = 3
                break
            if cross > 0 and py < by:
                parity ^= 1
        out[i] = parity if state < 0 else state
    return out


def _exact_parity(p, segs) -> int:
    """Exact ray casting; ``segs`` holds Fraction 4-tuples."""
    px, py = Fraction(p[0]), Fraction(p[1])
    parity = 0
    for ax, ay, bx, by in segs:
        if ay > by:
            ax, bx, ay, by = bx, ax, by, ay
        if not ay <= py <= by:
            continue
        cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        if cross == 0 and min(ax, bx) <= px <= max(ax, bx):
            return 2
        if ay == by:
            continue
        if cross > 0 and py < by:
            parity ^= 1
    return parity


# ---------------------------------------------------------------------------
# domains


@dataclass(frozen=True, eq=False)
class PolyDomain:
    """Interior of a Jordan polygon, or a box minus the closed polygon."""

    kind: str
    boundary: JordanPolygon
    box: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if self.kind not in ("interior", "exterior"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "exterior":
            bx0, by0, bx1, by1 = self.box
            xy = self.boundary.xy
            if not (bx0 < xy[:, 0].min() and xy[:, 0].max() < bx1 and by0 < xy[:, 1].min() and xy[:, 1].max() < by1):
                raise ValueError("polygon must lie strictly inside the box")

    @classmethod
    def interior(cls, poly: JordanPolygon) -> "PolyDomain":
        return cls("interior", poly)

    @classmethod
    def exterior_boxed(cls, poly: JordanPolygon, box=DEFAULT_BOX) -> "PolyDomain":
        return cls("exterior", poly, tuple(float(v) for v in box))

    @cached_property
    def box_ring(self) -> np.ndarray | None:
        if self.box is None:
            return None
        x0, y0, x1, y1 = self.box
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])

    @cached_property
    def segments(self) -> np.ndarray:
        """All boundary segments; polygon edges first, then the box."""
        segs = self.boundary.edges_xy()
        if self.box_ring is not None:
            r = self.box_ring
            segs = np.vstack([segs, np.hstack([r, np.roll(r, -1, axis=0)])])
        return np.ascontiguousarray(segs)

    @cached_property
    def index(self) -> SegmentIndex:
        return SegmentIndex(self.segments)

    @cached_property
    def _buckets(self):
        segs = self.segments
        y0 = float(min(segs[:, 1].min(), segs[:, 3].min()))
        y1 = float(max(segs[:, 1].max(), segs[:, 3].max()))
        nb = int(min(4096, max(1, len(segs) // 4)))
        dy = (y1 - y0) / nb if y1 > y0 else 1.0
        start, items = _bucket_edges(segs, y0, dy, nb)
        return start, items, y0, dy, nb

    @cached_property
    def exact_segments(self) -> list[tuple[Fraction, ...]]:
        poly = self.boundary
        den = 1 << poly.exponent
        pts = [(Fraction(int(x), den), Fraction(int(y), den)) for x, y in poly.ints.tolist()]
        segs = [(*a, *b) for a, b in zip(pts, pts[1:] + pts[:1])]
        if self.box_ring is not None:
            r = [tuple(map(Fraction, v)) for v in self.box_ring.tolist()]
            segs += [(*a, *b) for a, b in zip(r, r[1:] + r[:1])]
        return segs

    def locate_many(self, pts) -> np.ndarray:
        """Exact location of each point as a :class:`Location` code."""
        pts = np.ascontiguousarray(np.atleast_2d(pts), dtype=np.float64)
        if self.boundary.float_exact:
            start, items, y0, dy, nb = self._buckets
            raw = _ray_parity(pts, self.segments, start, items, y0, dy, nb)
        else:
            # the float view rounds some vertices: decide every point exactly
            raw = np.full(len(pts), 3, dtype=np.int8)
        for i in np.flatnonzero(raw == 3):
            raw[i] = _exact_parity(pts[i], self.exact_segments)
        out = np.where(raw == 2, Location.BOUNDARY, np.where(raw == 1, Location.INSIDE, Location.OUTSIDE))
        return out.astype(np.int8)

    def locate(self, p) -> Location:
        if not all(Fraction(float(c)) == Fraction(c) for c in p):
            return Location({2: 0, 1: 1, 0: -1}[_exact_parity((Fraction(p[0]), Fraction(p[1])), self.exact_segments)])
        return Location(int(self.locate_many([[float(p[0]), float(p[1])]])[0]))

    def contains(self, p) -> bool:
        loc = self.locate(p)
        if loc is Location.BOUNDARY:
            raise BoundaryPointError(f"{tuple(map(float, p))} lies on the boundary")
        return loc is Location.INSIDE

    def dist_to_boundary(self, p) -> tuple[float, tuple[float, float], int]:
        return self.index.nearest(p)

    @cached_property
    def mesh(self) -> "Mesh":
        return Mesh.build(self)


def dist_to_boundary(p, boundary) -> tuple[float, tuple[float, float], int]:
    """Nearest boundary point of a polygon (or domain) via the segment index."""
    if isinstance(boundary, PolyDomain):
        return boundary.dist_to_boundary(p)
    return PolyDomain.interior(boundary).dist_to_boundary(p)


# ---------------------------------------------------------------------------
# triangulation and dual channel


@dataclass(eq=False)
class Mesh:
    verts: np.ndarray
    tris: np.ndarray
    nbr: np.ndarray
    _trees: dict = field(default_factory=dict, repr=False)

    @classmethod
    def build(cls, domain: PolyDomain) -> "Mesh":
        ring = domain.boundary.xy
        if domain.kind == "interior":
            shape = shapely.Polygon(ring)
            verts = ring
        else:
            shape = shapely.Polygon(domain.box_ring, [ring])
            verts = np.vstack([ring, domain.box_ring])
        tri = shapely.constrained_delaunay_triangles(shape)
        coords = shapely.get_coordinates(tri).reshape(-1, 4, 2)[:, :3].reshape(-1, 2)
        nv = len(verts)
        uniq, inv = np.unique(np.vstack([verts, coords]), axis=0, return_inverse=True)
        if len(uniq) != nv:
            raise RuntimeError("triangulation introduced vertices not on the boundary")
        inv = inv.ravel()
        to_vert = np.empty(nv, dtype=np.int64)
        to_vert[inv[:nv]] = np.arange(nv)
        tris = to_vert[inv[nv:]].reshape(-1, 3)
        p = verts[tris]
        area2 = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
        flip = area2 < 0
        tris[flip] = tris[flip][:, [0, 2, 1]]
        if np.any(area2 == 0):
            raise RuntimeError("degenerate triangle in the triangulation")
        return cls(np.ascontiguousarray(verts, dtype=np.float64), tris, _neighbours(tris))

    def locate(self, p) -> int:
        """Index of a closed triangle containing ``p`` (the most central one on ties)."""
        v = self.verts[self.tris]
        px, py = float(p[0]), float(p[1])
        lam = np.empty((len(v), 3))
        for k in range(3):
            a = v[:, (k + 1) % 3]
            b = v[:, (k + 2) % 3]
            lam[:, k] = (b[:, 0] - a[:, 0]) * (py - a[:, 1]) - (b[:, 1] - a[:, 1]) * (px - a[:, 0])
        scale = np.abs(lam).sum(axis=1)
        score = lam.min(axis=1) / scale
        t = int(np.argmax(score))
        if score[t] < -1e-12:
            raise DisconnectedQueryError(f"({px}, {py}) is outside the closed domain")
        return t

    def _tree(self, root: int):
        if root not in self._trees:
            if len(self._trees) > 8:
                self._trees.clear()
            t = len(self.tris)
            a = np.repeat(np.arange(t), 3)
            b = self.nbr.ravel()
            ok = b >= 0
            g = coo_matrix((np.ones(ok.sum()), (a[ok], b[ok])), shape=(t, t)).tocsr()
            _, pred = breadth_first_order(g, root, directed=False, return_predecessors=True)
            extra = []
            for u, v in zip(a[ok], b[ok]):
                if u < v and pred[u] != v and pred[v] != u:
                    extra.append((int(u), int(v)))
            self._trees[root] = (pred, extra)
        return self._trees[root]

    def channels(self, tp: int, tq: int) -> list[list[int]]:
        """Dual walks from ``tp`` to ``tq``, one per homotopy class that can be shortest."""
        pred, extra = self._tree(tp)
        if tq != tp and pred[tq] < 0:
            raise DisconnectedQueryError("query points lie in different components")
        if len(extra) > 1:
            raise RuntimeError("domain is not simply or doubly connected")

        def from_root(x):
            path = [x]
            while path[-1] != tp:
                path.append(int(pred[path[-1]]))
            return path[::-1]

        out = [from_root(tq)]
        for u, v in extra:
            for a, b in ((u, v), (v, u)):
                out.append(_free_reduce(from_root(a) + from_root(b)[::-1] + from_root(tq)[1:]))
        return out

    def portals(self, walk: list[int]) -> tuple[np.ndarray, np.ndarray]:
        """Left and right portal endpoints when travelling along ``walk``."""
        lefts = np.empty((len(walk) - 1, 2))
        rights = np.empty((len(walk) - 1, 2))
        for s, (t, u) in enumerate(zip(walk[:-1], walk[1:])):
            k = int(np.flatnonzero(self.nbr[t] == u)[0])
            a = self.tris[t, (k + 1) % 3]
            b = self.tris[t, (k + 2) % 3]
            lefts[s] = self.verts[b]
            rights[s] = self.verts[a]
        return lefts, rights


def _neighbours(tris: np.ndarray) -> np.ndarray:
    t = len(tris)
    e0 = np.concatenate([tris[:, 1], tris[:, 2], tris[:, 0]])
    e1 = np.concatenate([tris[:, 2], tris[:, 0], tris[:, 1]])
    owner = np.tile(np.arange(t), 3)
    slot = np.repeat(np.arange(3), t)
    lo, hi = np.minimum(e0, e1), np.maximum(e0, e1)
    order = np.lexsort((hi, lo))
    lo, hi, owner, slot = lo[order], hi[order], owner[order], slot[order]
    same = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
    nbr = -np.ones((t, 3), dtype=np.int64)
    i = np.flatnonzero(same)
    nbr[owner[i], slot[i]] = owner[i + 1]
    nbr[owner[i + 1], slot[i + 1]] = owner[i]
    return nbr


def _free_reduce(walk: list[int]) -> list[int]:
    out: list[int] = []
    for x in walk:
        if len(out) >= 2 and out[-2] == x:
            out.pop()
        elif not out or out[-1] != x:
            out.append(x)
    return out


@numba.njit(cache=True, inline="always")
def _cross(ax, ay, bx, by, cx, cy):
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


@numba.njit(cache=True)
def _funnel(px, py, qx, qy, lefts, rights):
    n = lefts.shape[0] + 2
    L = np.empty((n, 2))
    R = np.empty((n, 2))
    L[0, 0] = px
    L[0, 1] = py
    R[0, 0] = px
    R[0, 1] = py
    L[1:-1] = lefts
    R[1:-1] = rights
    L[-1, 0] = qx
    L[-1, 1] = qy
    R[-1, 0] = qx
    R[-1, 1] = qy
    path = [(px, py)]
    ax, ay = px, py
    lx, ly = px, py
    rx, ry = px, py
    ai = 0
    li = 0
    ri = 0
    i = 1
    while i < n:
        plx, ply = L[i, 0], L[i, 1]
        prx, pry = R[i, 0], R[i, 1]
        if _cross(ax, ay, rx, ry, prx, pry) >= 0.0:
            if (ax == rx and ay == ry) or _cross(ax, ay, lx, ly, prx, pry) < 0.0:
                rx, ry, ri = prx, pry, i
            else:
                path.append((lx, ly))
                ax, ay, ai = lx, ly, li
                rx, ry, ri = ax, ay, ai
                i = ai + 1
                continue
        if _cross(ax, ay, lx, ly, plx, ply) <= 0.0:
            if (ax == lx and ay == ly) or _cross(ax, ay, rx, ry, plx, ply) > 0.0:
                lx, ly, li = plx, ply, i
            else:
                path.append((rx, ry))
                ax, ay, ai = rx, ry, ri
                lx, ly, li = ax, ay, ai
                i = ai + 1
                continue
        i += 1
    if path[-1][0] != qx or path[-1][1] != qy:
        path.append((qx, qy))
    out = np.empty((len(path), 2))
    for k in range(len(path)):
        out[k, 0] = path[k][0]
        out[k, 1] = path[k][1]
    return out


def _path_length(path: np.ndarray) -> float:
    return float(np.hypot(*np.diff(path, axis=0).T).sum())


@dataclass(frozen=True)
class GeodesicResult:
    length: float
    path: np.ndarray
    method: str

    def to_json(self) -> dict:
        return {"length": self.length, "path": self.path.tolist(), "method": self.method}


def geodesic(domain: PolyDomain, p, q) -> GeodesicResult:
    """Shortest path in the closed domain between ``p`` and ``q``."""
    p = (float(p[0]), float(p[1]))
    q = (float(q[0]), float(q[1]))
    for z in (p, q):
        if domain.locate(z) is Location.OUTSIDE:
            raise DisconnectedQueryError(f"{z} is outside the domain")
    mesh = domain.mesh
    tp, tq = mesh.locate(p), mesh.locate(q)
    best = None
    for walk in mesh.channels(tp, tq):
        if len(walk) == 1:
            path = np.array([p, q])
        else:
            lefts, rights = mesh.portals(walk)
            path = _funnel(p[0], p[1], q[0], q[1], lefts, rights)
        length = _path_length(path)
        if best is None or length < best[0]:
            best = (length, path)
    # the "visibility" label: every bend of the path is a boundary vertex
    return GeodesicResult(best[0], best[1], "visibility")


# ---------------------------------------------------------------------------
# grid oracle


@numba.njit(cache=True)
def _inside_cells(segs, x0, y0, h, nx, ny):
    """Cells whose centre has odd crossing parity (scanline per row)."""
    inside = np.zeros((ny, nx), dtype=np.bool_)
    counts = np.zeros(ny + 1, dtype=np.int64)
    m = segs.shape[0]
    for e in range(m):
        a = min(segs[e, 1], segs[e, 3])
        b = max(segs[e, 1], segs[e, 3])
        if a == b:
            continue
        j0 = max(int(np.ceil((a - y0) / h - 0.5)), 0)
        j1 = min(int(np.ceil((b - y0) / h - 0.5)), ny)
        for j in range(j0, j1):
            counts[j + 1] += 1
    start = np.cumsum(counts)
    fill = start[:-1].copy()
    xs = np.empty(start[-1])
    for e in range(m):
        ax, ay, bx, by = segs[e, 0], segs[e, 1], segs[e, 2], segs[e, 3]
        if ay == by:
            continue
        a = min(ay, by)
        b = max(ay, by)
        j0 = max(int(np.ceil((a - y0) / h - 0.5)), 0)
        j1 = min(int(np.ceil((b - y0) / h - 0.5)), ny)
        for j in range(j0, j1):
            yc = y0 + (j + 0.5) * h
            if yc < a or yc >= b:
                continue
            xs[fill[j]] = ax + (yc - ay) * (bx - ax) / (by - ay)
            fill[j] += 1
    for j in range(ny):
        row = np.sort(xs[start[j]:fill[j]])
        for k in range(0, len(row) - 1, 2):
            i0 = max(int(np.floor((row[k] - x0) / h - 0.5)) + 1, 0)
            i1 = min(int(np.ceil((row[k + 1] - x0) / h - 0.5)), nx)
            for i in range(i0, i1):
                xc = x0 + (i + 0.5) * h
                if row[k] < xc < row[k + 1]:
                    inside[j, i] = True
    return inside


@numba.njit(cache=True)
def _meets_open_cell(ax, ay, bx, by, cx0, cy0, cx1, cy1):
    # Liang-Barsky clip to the closed cell, then test the clipped midpoint
    t0 = 0.0
    t1 = 1.0
    dx = bx - ax
    dy = by - ay
    for k in range(4):
        if k == 0:
            p, q = -dx, ax - cx0
        elif k == 1:
            p, q = dx, cx1 - ax
        elif k == 2:
            p, q = -dy, ay - cy0
        else:
            p, q = dy, cy1 - ay
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            r = q / p
            if p < 0.0:
                if r > t1:
                    return False
                t0 = max(t0, r)
            else:
                if r < t0:
                    return False
                t1 = min(t1, r)
    if t1 < t0:
        return False
    tm = 0.5 * (t0 + t1)
    mx = ax + tm * dx
    my = ay + tm * dy
    return cx0 < mx < cx1 and cy0 < my < cy1


@numba.njit(cache=True)
def _blocked_cells(segs, x0, y0, h, nx, ny):
    blocked = np.zeros((ny, nx), dtype=np.bool_)
    for e in range(segs.shape[0]):
        ax, ay, bx, by = segs[e, 0], segs[e, 1], segs[e, 2], segs[e, 3]
        i0 = max(int(np.floor((min(ax, bx) - x0) / h)) - 1, 0)
        i1 = min(int(np.floor((max(ax, bx) - x0) / h)) + 1, nx - 1)
        j0 = max(int(np.floor((min(ay, by) - y0) / h)) - 1, 0)
        j1 = min(int(np.floor((max(ay, by) - y0) / h)) + 1, ny - 1)
        for j in range(j0, j1 + 1):
            for i in range(i0, i1 + 1):
                if blocked[j, i]:
                    continue
                if _meets_open_cell(ax, ay, bx, by, x0 + i * h, y0 + j * h, x0 + (i + 1) * h, y0 + (j + 1) * h):
                    blocked[j, i] = True
    return blocked


_MOVES = np.array(
    [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1),
     (2, 1), (2, -1), (-2, 1), (-2, -1), (1, 2), (1, -2), (-1, 2), (-1, -2)],
    dtype=np.int64,
)


@numba.njit(cache=True)
def _move_ok(free, i, j, di, dj, nx, ny):
    ti = i + di
    tj = j + dj
    if ti < 0 or tj < 0 or ti >= nx or tj >= ny or not free[tj, ti]:
        return False
    adi = abs(di)
    adj = abs(dj)
    si = 1 if di > 0 else -1
    sj = 1 if dj > 0 else -1
    if adi == 1 and adj == 1:
        return free[j, i + si] and free[j + sj, i]
    if adi == 2:
        # centre-to-centre segment crosses (i+si, j) and (i+si, j+sj)
        return free[j, i + si] and free[j + sj, i + si]
    if adj == 2:
        return free[j + sj, i] and free[j + sj, i + si]
    return True


@numba.njit(cache=True)
def _dijkstra(free, h, src_idx, src_d, dst_idx, dst_d, moves):
    ny, nx = free.shape
    dist = np.full(nx * ny, np.inf)
    heap = [(0.0, np.int64(0))]
    heap.pop()
    for k in range(len(src_idx)):
        c = src_idx[k]
        if src_d[k] < dist[c]:
            dist[c] = src_d[k]
            heapq.heappush(heap, (src_d[k], c))
    target = np.full(nx * ny, np.inf)
    for k in range(len(dst_idx)):
        target[dst_idx[k]] = min(target[dst_idx[k]], dst_d[k])
    steps = np.empty(moves.shape[0])
    for k in range(moves.shape[0]):
        steps[k] = h * np.sqrt(moves[k, 0] ** 2 + moves[k, 1] ** 2)
    best = np.inf
    while len(heap) > 0:
        d, c = heapq.heappop(heap)
        if d > dist[c]:
            continue
        if d >= best:
            break
        if target[c] < np.inf:
            best = min(best, d + target[c])
        j = c // nx
        i = c - j * nx
        for k in range(moves.shape[0]):
            di = moves[k, 0]
            dj = moves[k, 1]
            if not _move_ok(free, i, j, di, dj, nx, ny):
                continue
            nc = (j + dj) * nx + (i + di)
            nd = d + steps[k]
            if nd < dist[nc]:
                dist[nc] = nd
                heapq.heappush(heap, (nd, nc))
    return best


def _segment_clear(domain: PolyDomain, a, c) -> bool:
    """True when the open segment from ``a`` to ``c`` meets no boundary edge away from ``a``."""
    ids = domain.index.candidates(min(a[0], c[0]), min(a[1], c[1]), max(a[0], c[0]), max(a[1], c[1]))
    for e in domain.segments[ids]:
        u, v = e[:2], e[2:]
        if _touches_only_at(u, v, np.asarray(a), np.asarray(c)):
            continue
        return False
    return True


def _touches_only_at(u, v, a, c) -> bool:
    """True when segment ``a c`` meets edge ``u v`` at most in the point ``a``."""

    def cr(o, p, q):
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])

    def within(w, s, t):
        return min(s[0], t[0]) <= w[0] <= max(s[0], t[0]) and min(s[1], t[1]) <= w[1] <= max(s[1], t[1])

    d1, d2 = cr(u, v, a), cr(u, v, c)
    d3, d4 = cr(a, c, u), cr(a, c, v)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return False
    if d2 == 0 and within(c, u, v):
        return False
    for w, dw in ((u, d3), (v, d4)):
        if dw == 0 and within(w, a, c) and not (w[0] == a[0] and w[1] == a[1]):
            return False
    return True


@dataclass(frozen=True)
class Grid:
    free: np.ndarray
    x0: float
    y0: float
    h: float

    def centre(self, i, j):
        return (self.x0 + (i + 0.5) * self.h, self.y0 + (j + 0.5) * self.h)


def build_grid(domain: PolyDomain, h: float, window=None) -> Grid:
    """Free cells: centre inside the domain and no boundary edge through the open cell."""
    segs = domain.segments
    if window is None:
        window = domain.box if domain.kind == "exterior" else (
            segs[:, [0, 2]].min(), segs[:, [1, 3]].min(), segs[:, [0, 2]].max(), segs[:, [1, 3]].max())
    wx0, wy0, wx1, wy1 = map(float, window)
    x0 = np.floor(wx0 / h) * h
    y0 = np.floor(wy0 / h) * h
    nx = int(np.ceil((wx1 - x0) / h))
    ny = int(np.ceil((wy1 - y0) / h))
    if nx * ny > 60_000_000:
        raise GridResolutionError(f"grid of {nx}x{ny} cells exceeds the memory budget; shrink the window")
    inside = _inside_cells(segs, x0, y0, h, nx, ny)
    blocked = _blocked_cells(segs, x0, y0, h, nx, ny)
    return Grid(inside & ~blocked, x0, y0, h)


def _seeds(domain: PolyDomain, grid: Grid, p, radius: int = 2):
    ny, nx = grid.free.shape
    ci = int(np.floor((p[0] - grid.x0) / grid.h))
    cj = int(np.floor((p[1] - grid.y0) / grid.h))
    idx, dist = [], []
    for j in range(cj - radius, cj + radius + 1):
        for i in range(ci - radius, ci + radius + 1):
            if 0 <= i < nx and 0 <= j < ny and grid.free[j, i]:
                c = grid.centre(i, j)
                if _segment_clear(domain, p, c):
                    idx.append(j * nx + i)
                    dist.append(float(np.hypot(c[0] - p[0], c[1] - p[1])))
    return np.array(idx, dtype=np.int64), np.array(dist)


def grid_geodesic(domain: PolyDomain, p, q, h: float, *, window=None) -> float:
    """Shortest 16-connected grid path length between ``p`` and ``q``.

    Knight and diagonal moves are allowed only when every cell the straight
    move passes through is free. Raises :class:`GridResolutionError` when a
    query point has no visible free cell nearby or the points are not joined.
    """
    p = (float(p[0]), float(p[1]))
    q = (float(q[0]), float(q[1]))
    grid = build_grid(domain, h, window)
    sp, dp = _seeds(domain, grid, p)
    sq, dq = _seeds(domain, grid, q)
    if not len(sp) or not len(sq):
        raise GridResolutionError("grid too coarse: a query point has no visible free cell")
    length = _dijkstra(grid.free, grid.h, sp, dp, sq, dq, _MOVES)
    if not np.isfinite(length):
        raise GridResolutionError("grid too coarse: query points are not joined by free cells")
    return float(length)


# ---------------------------------------------------------------------------
# descent cost through the side-teeth bands


@dataclass(frozen=True)
class DescentRow:
    m: int
    D: float
    increment: float | None
    target: tuple[float, float]


def exterior_descent(m: int, params: CombParams | None = None, anchor=ANCHOR) -> tuple[float, tuple[float, float]]:
    """Geodesic distance in the depth-``m`` boxed exterior from ``anchor`` to the nearest walled floor midpoint."""
    rho = params.rho if params else Fraction(3, 4)
    side = params.side_teeth if params else True
    poly = t1_domain_polygon(m, rho, side_teeth=side, check=False)
    dom = PolyDomain.exterior_boxed(poly)
    best = (np.inf, None)
    for x, y in floor_midpoints(m, walled_only=True):
        d = geodesic(dom, anchor, (float(x), float(y))).length
        if d < best[0]:
            best = (d, (float(x), float(y)))
    return best


def band_descent_cost(n: int, params: CombParams | None = None, anchor=ANCHOR) -> list[DescentRow]:
    """Table of D(m) for m = 1..n together with the increments D(m) - D(m-1)."""
    if not 1 <= n <= 8:
        raise ValueError("depth must be in 1..8")
    rows: list[DescentRow] = []
    for m in range(1, n + 1):
        d, target = exterior_descent(m, params, anchor)
        inc = None if not rows else d - rows[-1].D
        rows.append(DescentRow(m, d, inc, target))
    return rows
