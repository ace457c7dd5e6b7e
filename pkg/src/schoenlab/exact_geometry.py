"""Exact dyadic arithmetic, orientation predicates and polygon simplicity.

All comb geometry lives on dyadic rationals ``m * 2**-e``.  Polygons keep
their coordinates as integers over a shared power of two, so every predicate
below is decided with integer arithmetic.  Floating-point polygons are handled
by the same code: a double is itself a dyadic rational and is converted exactly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import numba

#: Hard ceiling on mantissa width.  Python integers never wrap, so overflow is a
#: policy decision: anything wider than this is reported instead of computed.
MAX_MANTISSA_BITS = 4096
MAX_EXPONENT = 4096


class DyadicOverflowError(OverflowError):
    """Raised when a dyadic result exceeds the supported mantissa width."""


@total_ordering
class Dyadic:
    """Exact rational ``mantissa * 2**-exponent`` kept in canonical form."""

    __slots__ = ("mantissa", "exponent")

    def __init__(self, mantissa: int, exponent: int = 0):
        mantissa = int(mantissa)
        exponent = int(exponent)
        if exponent < 0:
            mantissa <<= -exponent
            exponent = 0
        if mantissa == 0:
            exponent = 0
        elif exponent:
            tz = (mantissa & -mantissa).bit_length() - 1
            if tz:
                shift = min(tz, exponent)
                mantissa >>= shift
                exponent -= shift
        if mantissa.bit_length() > MAX_MANTISSA_BITS or exponent > MAX_EXPONENT:
            raise DyadicOverflowError(
                f"dyadic exceeds {MAX_MANTISSA_BITS}-bit mantissa / exponent {MAX_EXPONENT}"
            )
        object.__setattr__(self, "mantissa", mantissa)
        object.__setattr__(self, "exponent", exponent)

    def __setattr__(self, name, value):
        raise AttributeError("Dyadic is immutable")

    @classmethod
    def from_value(cls, value) -> "Dyadic":
        """Convert an int, Fraction, float or Dyadic without rounding."""
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value), 0)
        if isinstance(value, (float, np.floating)):
            if not math.isfinite(value):
                raise ValueError(f"non-finite value {value!r}")
            num, den = float(value).as_integer_ratio()
        else:
            frac = Fraction(value)
            num, den = frac.numerator, frac.denominator
        if den & (den - 1):
            raise ValueError(f"{value!r} is not a dyadic rational")
        return cls(num, den.bit_length() - 1)

    @classmethod
    def pow2(cls, k: int) -> "Dyadic":
        """Return ``2**k`` for any integer ``k``."""
        return cls(1, -k)

    def _aligned(self, other: "Dyadic") -> tuple[int, int, int]:
        e = max(self.exponent, other.exponent)
        return self.mantissa << (e - self.exponent), other.mantissa << (e - other.exponent), e

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, e = self._aligned(other)
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b, e = self._aligned(other)
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return Dyadic(self.mantissa * other.mantissa, self.exponent + other.exponent)

    __rmul__ = __mul__

    def __neg__(self):
        return Dyadic(-self.mantissa, self.exponent)

    def __abs__(self):
        return Dyadic(abs(self.mantissa), self.exponent)

    def scale2(self, k: int) -> "Dyadic":
        """Multiply by ``2**k`` exactly."""
        return Dyadic(self.mantissa, self.exponent - k)

    def cmp(self, other) -> int:
        other = _coerce(other)
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.mantissa == other.mantissa and self.exponent == other.exponent

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.cmp(other) < 0

    def __hash__(self):
        return hash(self.as_fraction())

    def __bool__(self):
        return self.mantissa != 0

    def as_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.exponent)

    def __float__(self):
        return float(self.as_fraction())

    def to_pair(self) -> list[int]:
        return [self.mantissa, self.exponent]

    def __repr__(self):
        return f"Dyadic({self.mantissa}, {self.exponent})"

    def __str__(self):
        return str(self.as_fraction())


def _coerce(value):
    if isinstance(value, Dyadic):
        return value
    if isinstance(value, (int, np.integer, Fraction, float, np.floating)):
        return Dyadic.from_value(value)
    return NotImplemented


class Ordering(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def dy_arith(a: Dyadic, b: Dyadic, op: str):
    """Exact ``add``/``sub``/``mul`` or three-way ``cmp`` of two dyadics."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "cmp":
        return Ordering(a.cmp(b))
    raise ValueError(f"unknown op {op!r}")


class DyPoint(NamedTuple):
    x: Dyadic
    y: Dyadic

    @classmethod
    def of(cls, x, y) -> "DyPoint":
        return cls(Dyadic.from_value(x), Dyadic.from_value(y))


class Orientation(Enum):
    RIGHT = -1
    COLLINEAR = 0
    LEFT = 1


def _as_fraction_pair(p) -> tuple[Fraction, Fraction]:
    x, y = p
    fx = x.as_fraction() if isinstance(x, Dyadic) else Fraction(x)
    fy = y.as_fraction() if isinstance(y, Dyadic) else Fraction(y)
    return fx, fy


def orient(p, q, r) -> Orientation:
    """Exact sign of ``(q - p) x (r - p)``; accepts Dyadic, int, Fraction or float."""
    (px, py), (qx, qy), (rx, ry) = (_as_fraction_pair(v) for v in (p, q, r))
    d = (qx - px) * (ry - py) - (qy - py) * (rx - px)
    return Orientation((d > 0) - (d < 0))


# ---------------------------------------------------------------------------
# stereographic projection (unit sphere, projection from the north pole)


def stereo(p) -> tuple[float, float, float]:
    x, y = float(p[0]), float(p[1])
    r2 = x * x + y * y
    return (2.0 * x / (1.0 + r2), 2.0 * y / (1.0 + r2), (r2 - 1.0) / (r2 + 1.0))


def stereo_inv(P) -> tuple[float, float]:
    X, Y, Z = (float(c) for c in P)
    if Z >= 1.0:
        raise ValueError("the north pole has no planar preimage")
    return (X / (1.0 - Z), Y / (1.0 - Z))


def chordal(p, q) -> float:
    """Classical chordal metric ``|p-q| / sqrt((1+|p|^2)(1+|q|^2))``.

    Equals half the Euclidean chord between ``stereo(p)`` and ``stereo(q)``,
    hence never exceeds ``|p - q|``.
    """
    px, py, qx, qy = float(p[0]), float(p[1]), float(q[0]), float(q[1])
    d = math.hypot(px - qx, py - qy)
    return d / math.sqrt((1.0 + px * px + py * py) * (1.0 + qx * qx + qy * qy))


# ---------------------------------------------------------------------------
# polygons


def _common_scale(values: Iterable) -> tuple[list[int], int]:
    """Integers ``k_i`` and exponent ``e`` with ``values[i] == k_i * 2**-e``."""
    dys = [Dyadic.from_value(v) for v in values]
    e = max((d.exponent for d in dys), default=0)
    return [d.mantissa << (e - d.exponent) for d in dys], e


def _int_array(ints: Sequence[int] | np.ndarray) -> np.ndarray:
    arr = np.asarray(ints, dtype=object)
    if arr.size and max(abs(int(v)) for v in arr.ravel()) < (1 << 62):
        return arr.astype(np.int64)
    return arr


class JordanPolygon:
    """Closed vertex chain, counterclockwise, implicit closing edge.

    ``ints * 2**-exponent`` are the exact coordinates.  ``exact`` records
    whether these coordinates are the construction's true values (dyadic
    constructions) or roundings of irrational ones (floating generators).
    """

    def __init__(self, ints: np.ndarray, exponent: int, *, exact: bool = True):
        ints = np.asarray(ints)
        if ints.ndim != 2 or ints.shape[1] != 2 or len(ints) < 3:
            raise ValueError("a polygon needs at least 3 vertices")
        if ints.dtype != np.int64:
            ints = _int_array(ints.tolist())
        nxt = np.roll(ints, -1, axis=0)
        if np.any(np.all(ints == nxt, axis=1)):
            raise ValueError("consecutive vertices must be distinct")
        if _signed_area2(ints) < 0:
            ints = ints[::-1].copy()
        self.ints = ints
        self.exponent = int(exponent)
        self.exact = exact
        self.simplicity_checked = False
        self._xy = None

    @classmethod
    def from_points(cls, points, *, exact: bool | None = None) -> "JordanPolygon":
        """Build from Dyadic/Fraction/int/float coordinate pairs."""
        pts = list(points)
        flat = [c for p in pts for c in p]
        if exact is None:
            exact = not any(isinstance(c, (float, np.floating)) for c in flat)
        ints, e = _common_scale(flat)
        return cls(np.array(ints, dtype=object).reshape(-1, 2), e, exact=exact)

    @classmethod
    def from_floats(cls, xy: np.ndarray, *, exact: bool = False) -> "JordanPolygon":
        xy = np.asarray(xy, dtype=float)
        return cls.from_points([(float(a), float(b)) for a, b in xy], exact=exact)

    def __len__(self):
        return len(self.ints)

    @property
    def xy(self) -> np.ndarray:
        """Float64 view of the vertices."""
        if self._xy is None:
            if self.ints.dtype == np.int64 and self.exponent < 1000:
                self._xy = np.ldexp(self.ints.astype(float), -self.exponent)
            else:
                self._xy = np.array(
                    [[float(Fraction(int(v), 1 << self.exponent)) for v in row] for row in self.ints]
                )
        return self._xy

    @property
    def float_exact(self) -> bool:
        """Whether :attr:`xy` reproduces every vertex without rounding."""
        if self.exponent > 1000:
            return False
        if self.ints.dtype == np.int64:
            return bool(np.abs(self.ints).max() < (1 << 53))
        return all(Fraction(float(Fraction(int(v), 1 << self.exponent))) == Fraction(int(v), 1 << self.exponent)
                   for v in self.ints.ravel())

    def vertex(self, k: int) -> DyPoint:
        x, y = self.ints[k]
        return DyPoint(Dyadic(int(x), self.exponent), Dyadic(int(y), self.exponent))

    @property
    def vertices(self) -> list[DyPoint]:
        return [self.vertex(k) for k in range(len(self))]

    def edges_xy(self) -> np.ndarray:
        """(m, 4) float array of edges ``x0, y0, x1, y1``."""
        xy = self.xy
        return np.hstack([xy, np.roll(xy, -1, axis=0)])

    def area(self) -> Fraction:
        return Fraction(int(_signed_area2(self.ints)), 2 << (2 * self.exponent))

    def __repr__(self):
        return f"JordanPolygon({len(self)} vertices, exponent={self.exponent}, exact={self.exact})"


def _signed_area2(ints: np.ndarray) -> int:
    if ints.dtype == np.int64 and np.abs(ints).max(initial=0) < (1 << 30):
        x, y = ints[:, 0], ints[:, 1]
        return int(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
    pts = [(int(a), int(b)) for a, b in ints]
    s = 0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]):
        s += x0 * y1 - x1 * y0
    return s


# ---------------------------------------------------------------------------
# simplicity


@dataclass(frozen=True)
class SimplicityResult:
    simple: bool
    pair: tuple[int, int] | None = None
    segments: tuple | None = None
    caveat: str | None = None

    def __bool__(self):
        return self.simple


class SimplicityError(ValueError):
    def __init__(self, result: SimplicityResult):
        super().__init__(f"polygon is not simple: edges {result.pair} {result.segments}")
        self.result = result


def _cross(ox, oy, ax, ay, bx, by) -> int:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _on_segment(px, py, qx, qy, rx, ry) -> bool:
    """``r`` collinear with ``pq`` lies in its closed bounding box."""
    return min(px, qx) <= rx <= max(px, qx) and min(py, qy) <= ry <= max(py, qy)


def segments_intersect(a, b, c, d) -> bool:
    """Closed segments ``ab`` and ``cd`` share at least one point (exact for ints)."""
    (ax, ay), (bx, by), (cx, cy), (dx, dy) = a, b, c, d
    d1 = _sign(_cross(cx, cy, dx, dy, ax, ay))
    d2 = _sign(_cross(cx, cy, dx, dy, bx, by))
    d3 = _sign(_cross(ax, ay, bx, by, cx, cy))
    d4 = _sign(_cross(ax, ay, bx, by, dx, dy))
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    if d1 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if d2 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    if d3 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if d4 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    return False


def _adjacent_ok(a, b, c) -> bool:
    """Edges ``ab`` and ``bc`` meet only at ``b``."""
    (ax, ay), (bx, by), (cx, cy) = a, b, c
    if _cross(ax, ay, bx, by, cx, cy) != 0:
        return True
    # collinear: fine only if c continues past b away from a
    return (bx - ax) * (cx - bx) + (by - ay) * (cy - by) > 0


def _pairs_conflict(pts, i, j) -> bool:
    m = len(pts)
    a, b = pts[i], pts[(i + 1) % m]
    c, d = pts[j], pts[(j + 1) % m]
    if (i + 1) % m == j:
        return not _adjacent_ok(a, b, d)
    if (j + 1) % m == i:
        return not _adjacent_ok(c, d, b)
    return segments_intersect(a, b, c, d)


def _python_points(poly: JordanPolygon) -> list[tuple[int, int]]:
    return [(int(a), int(b)) for a, b in poly.ints]


def _report(poly: JordanPolygon, i: int, j: int) -> SimplicityResult:
    m = len(poly)
    seg = lambda k: (tuple(map(str, poly.vertex(k))), tuple(map(str, poly.vertex((k + 1) % m))))
    i, j = min(i, j), max(i, j)
    return SimplicityResult(False, (i, j), (seg(i), seg(j)), _caveat(poly))


def _caveat(poly: JordanPolygon) -> str | None:
    if poly.exact:
        return None
    return "decided exactly on the floating-point vertices, which round the ideal curve"


def brute_force_is_simple(poly: JordanPolygon) -> SimplicityResult:
    """O(m^2) all-pairs reference check."""
    pts = _python_points(poly)
    m = len(pts)
    for i in range(m):
        for j in range(i + 1, m):
            if _pairs_conflict(pts, i, j):
                return _report(poly, i, j)
    return SimplicityResult(True, caveat=_caveat(poly))


def _sweep_is_simple(poly: JordanPolygon) -> SimplicityResult:
    """Sweep in x with an active set keyed by right end; exact predicates."""
    pts = _python_points(poly)
    m = len(pts)
    edges = []
    for k in range(m):
        (x0, y0), (x1, y1) = pts[k], pts[(k + 1) % m]
        edges.append((min(x0, x1), max(x0, x1), min(y0, y1), max(y0, y1), k))
    edges.sort()
    expiry: list[tuple[int, int]] = []
    alive: dict[int, tuple[int, int, int]] = {}
    for xmin, xmax, ymin, ymax, k in edges:
        while expiry and expiry[0][0] < xmin:
            _, gone = heapq.heappop(expiry)
            alive.pop(gone, None)
        for j, (jymin, jymax, _) in alive.items():
            if jymax < ymin or jymin > ymax:
                continue
            if _pairs_conflict(pts, min(j, k), max(j, k)):
                return _report(poly, j, k)
        alive[k] = (ymin, ymax, xmax)
        heapq.heappush(expiry, (xmax, k))
    return SimplicityResult(True, caveat=_caveat(poly))


def _is_orthogonal(ints: np.ndarray) -> bool:
    nxt = np.roll(ints, -1, axis=0)
    return bool(np.all((ints[:, 0] == nxt[:, 0]) | (ints[:, 1] == nxt[:, 1])))


@numba.njit(cache=True)
def _hv_count_kernel(ev_x, ev_kind, ev_a, ev_b, ev_id, nlev):
    """Sweep events; returns the first vertical id meeting > 2 horizontals, else -1.

    kind 0 inserts level ``a``, kind 1 queries levels ``[a, b]`` for vertical ``id``,
    kind 2 removes level ``a``.  Events are pre-sorted by (x, kind).
    """
    tree = np.zeros(nlev + 1, dtype=np.int64)
    for k in range(ev_x.shape[0]):
        kind = ev_kind[k]
        if kind == 1:
            lo = ev_a[k]
            hi = ev_b[k]
            total = 0
            i = hi + 1
            while i > 0:
                total += tree[i]
                i -= i & (-i)
            i = lo
            while i > 0:
                total -= tree[i]
                i -= i & (-i)
            if total > 2:
                return ev_id[k]
        else:
            delta = 1 if kind == 0 else -1
            i = ev_a[k] + 1
            while i <= nlev:
                tree[i] += delta
                i += i & (-i)
    return -1


def _orthogonal_is_simple(poly: JordanPolygon) -> SimplicityResult:
    """O(m log m) check for axis-parallel polygons with int64 coordinates."""
    ints = poly.ints
    m = len(ints)
    nxt = np.roll(ints, -1, axis=0)
    prv = np.roll(ints, 1, axis=0)
    d_in = ints - prv
    d_out = nxt - ints
    cross = d_in[:, 0] * d_out[:, 1] - d_in[:, 1] * d_out[:, 0]
    dot = d_in[:, 0] * d_out[:, 0] + d_in[:, 1] * d_out[:, 1]
    spikes = np.nonzero((cross == 0) & (dot < 0))[0]
    if len(spikes):
        v = int(spikes[0])
        return _report(poly, (v - 1) % m, v)
    # drop straight-through vertices; remember original edge index of each run
    keep = np.nonzero(cross != 0)[0]
    if len(keep) < 4:
        return brute_force_is_simple(poly)
    verts = ints[keep]
    edge_orig = keep  # merged edge k starts at original vertex keep[k]
    a = verts
    b = np.roll(verts, -1, axis=0)
    horiz = a[:, 1] == b[:, 1]
    hid = np.nonzero(horiz)[0]
    vid = np.nonzero(~horiz)[0]

    def collinear_overlap(ids, axis):
        fixed = a[ids, 1 - axis]
        lo = np.minimum(a[ids, axis], b[ids, axis])
        hi = np.maximum(a[ids, axis], b[ids, axis])
        order = np.lexsort((lo, fixed))
        f, lo, hi, ids_s = fixed[order], lo[order], hi[order], ids[order]
        if len(f) < 2:
            return None
        same = f[1:] == f[:-1]
        group = np.concatenate([[0], np.cumsum(~same)])
        span = int(hi.max() - lo.min()) + 1
        shifted = hi + group * span
        runmax = np.maximum.accumulate(shifted) - group * span
        bad = np.nonzero(same & (lo[1:] <= runmax[:-1]))[0]
        if not len(bad):
            return None
        k = int(bad[0]) + 1
        # find the earlier segment in the group that reaches lo[k]
        j = k - 1
        while hi[j] < lo[k]:
            j -= 1
        return int(ids_s[j]), int(ids_s[k])

    for ids, axis in ((hid, 0), (vid, 1)):
        hit = collinear_overlap(ids, axis)
        if hit is not None:
            return _merged_report(poly, edge_orig, keep, hit)

    hy = a[hid, 1]
    hx0 = np.minimum(a[hid, 0], b[hid, 0])
    hx1 = np.maximum(a[hid, 0], b[hid, 0])
    levels = np.unique(hy)
    hlev = np.searchsorted(levels, hy)
    vx = a[vid, 0]
    vy0 = np.minimum(a[vid, 1], b[vid, 1])
    vy1 = np.maximum(a[vid, 1], b[vid, 1])
    qlo = np.searchsorted(levels, vy0, side="left")
    qhi = np.searchsorted(levels, vy1, side="right") - 1
    nh, nv = len(hid), len(vid)
    ev_x = np.concatenate([hx0, vx, hx1])
    ev_kind = np.concatenate([np.zeros(nh, np.int64), np.ones(nv, np.int64), np.full(nh, 2, np.int64)])
    ev_a = np.concatenate([hlev, qlo, hlev]).astype(np.int64)
    ev_b = np.concatenate([hlev, qhi, hlev]).astype(np.int64)
    ev_id = np.concatenate([hid, vid, hid]).astype(np.int64)
    order = np.lexsort((ev_kind, ev_x))
    bad_v = _hv_count_kernel(
        ev_x[order].astype(np.int64), ev_kind[order], ev_a[order], ev_b[order], ev_id[order], len(levels)
    )
    if bad_v < 0:
        return SimplicityResult(True, caveat=_caveat(poly))
    k = int(bad_v)
    mk = len(verts)
    x, y0, y1 = a[k, 0], min(a[k, 1], b[k, 1]), max(a[k, 1], b[k, 1])
    for h in hid:
        if h in ((k - 1) % mk, (k + 1) % mk):
            continue
        lo, hi = min(a[h, 0], b[h, 0]), max(a[h, 0], b[h, 0])
        if lo <= x <= hi and y0 <= a[h, 1] <= y1:
            return _merged_report(poly, edge_orig, keep, (int(h), k))
    raise AssertionError("sweep flagged a vertical edge but no partner was found")


def _merged_report(poly, edge_orig, keep, pair) -> SimplicityResult:
    i, j = pair
    return _report(poly, int(edge_orig[i]), int(edge_orig[j]))


def polygon_is_simple(poly: JordanPolygon) -> SimplicityResult:
    """Exact simplicity decision; sets ``poly.simplicity_checked`` on success.

    Axis-parallel polygons with machine-sized coordinates use an O(m log m)
    sweep with a Fenwick tree over y-levels; everything else uses an x-sweep
    with exact integer predicates.
    """
    if len(poly) < 3:
        raise ValueError("need at least 3 vertices")
    if poly.ints.dtype == np.int64 and np.abs(poly.ints).max() < (1 << 30) and _is_orthogonal(poly.ints):
        result = _orthogonal_is_simple(poly)
    else:
        result = _sweep_is_simple(poly)
    if result.simple:
        poly.simplicity_checked = True
    return result


def require_simple(poly: JordanPolygon) -> JordanPolygon:
    result = polygon_is_simple(poly)
    if not result.simple:
        raise SimplicityError(result)
    return poly
