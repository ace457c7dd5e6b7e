"""The unit square with cusped slits cut in from its right side, and John routes."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exact_geometry import JordanPolygon, require_simple
from .inner_metric import Location, PolyDomain

X0 = (0.25, 0.5)


@dataclass(frozen=True)
class CuspParams:
    s: float = 0.5
    C: float = 1.0
    depth: int = 8
    arc_samples: int = 64

    def __post_init__(self):
        if not 0 < self.s <= 1:
            raise ValueError("s must lie in (0, 1]")
        if not self.C >= 1:
            raise ValueError("C must be at least 1")
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.arc_samples < 8:
            raise ValueError("arc_samples must be at least 8")

    @property
    def inv_s(self) -> int | None:
        """``1/s`` when it is an integer, else ``None``."""
        r = Fraction(self.s).limit_denominator(10**6)
        inv = 1 / r
        return int(inv) if inv.denominator == 1 and abs(float(r) - self.s) < 1e-15 else None

    @property
    def exact(self) -> bool:
        """Dyadic coordinates are available when ``1/s`` is an integer, ``C`` dyadic and ``M`` a power of 2."""
        c = Fraction(self.C)
        m = self.arc_samples
        return self.inv_s is not None and c.denominator & (c.denominator - 1) == 0 and m & (m - 1) == 0


def xi(t, s: float = 0.5, C: float = 1.0):
    """``min(t^2, C t^(1+1/s))``; exact for Fraction ``t`` when ``1/s`` is an integer."""
    if isinstance(t, Fraction):
        inv = CuspParams(s, C, 0, 8).inv_s
        if inv is not None:
            return min(t * t, Fraction(C) * t ** (1 + inv))
        t = float(t)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("xi is defined for t >= 0")
    out = np.minimum(t * t, C * t ** (1.0 + 1.0 / s))
    return float(out) if out.ndim == 0 else out


def _xi_exact(t: Fraction, params: CuspParams) -> Fraction:
    return min(t * t, Fraction(params.C) * t ** (1 + params.inv_s))


def slit_xgrid(i: int, params: CuspParams) -> list:
    """x-coordinates of the sampled slit graph, tip first."""
    M = params.arc_samples
    if params.exact:
        w = Fraction(1, 2**i)
        return [1 - w + k * w / M for k in range(M + 1)]
    w = 2.0**-i
    return [1.0 - w + k * w / M for k in range(M + 1)]


def _graph_y(x, i: int, params: CuspParams):
    if params.exact:
        return _xi_exact(x - 1 + Fraction(1, 2**i), params) + Fraction(1, 2**i)
    return xi(max(x - 1.0 + 2.0**-i, 0.0), params.s, params.C) + 2.0**-i


@dataclass(frozen=True)
class SlitArcs:
    i: int
    A: tuple[tuple, tuple]
    B: np.ndarray
    tip: tuple


def slit_arcs(i: int, params: CuspParams) -> SlitArcs:
    """The bottom arc ``A_i`` and the graph arc ``B_i`` over ``[1 - 2^(-i-1), 1]``."""
    if not 1 <= i <= max(params.depth, 1):
        raise ValueError("slit index out of range")
    one = Fraction(1) if params.exact else 1.0
    y = one / 2**i
    xs = [x for x in slit_xgrid(i, params) if x >= 1 - one / 2 ** (i + 1)]
    B = np.array([[float(x), float(_graph_y(x, i, params))] for x in xs])
    return SlitArcs(i, ((1 - one / 2 ** (i + 1), y), (one, y)), B, (1 - y, y))


def _boundary_points(params: CuspParams) -> list[tuple]:
    one = Fraction(1) if params.exact else 1.0
    zero = one - one
    pts = [(zero, zero), (one, zero)]
    for i in range(params.depth, 0, -1):
        y = one / 2**i
        pts.append((one, y))
        xs = slit_xgrid(i, params)
        pts.append((xs[0], y))
        for x in xs[1:]:
            pts.append((x, _graph_y(x, i, params)))
    pts += [(one, one), (zero, one)]
    return pts


@lru_cache(maxsize=32)
def john_domain(params: CuspParams, check: bool = True) -> JordanPolygon:
    """Unit square whose right side carries ``depth`` cusped slits; the wedges are exterior."""
    poly = JordanPolygon.from_points(_boundary_points(params), exact=params.exact)
    if check:
        require_simple(poly)
    return poly


@lru_cache(maxsize=32)
def john_region(params: CuspParams) -> PolyDomain:
    return PolyDomain.interior(john_domain(params))


def wedge_midpoint(i: int, params: CuspParams) -> tuple:
    """A point strictly inside the exterior wedge of slit ``i``."""
    if params.exact:
        q = Fraction(1, 2 ** (i + 2))
        return (1 - 3 * q, Fraction(1, 2**i) + _xi_exact(q, params) / 2)
    q = 2.0 ** -(i + 2)
    return (1 - 3 * q, 2.0**-i + xi(q, params.s, params.C) / 2)


# ---------------------------------------------------------------------------
# John routes


def _hub(p, params: CuspParams):
    """Waypoint that lifts ``p`` off its nearest slit before heading to ``X0``."""
    x, y = float(p[0]), float(p[1])
    if y > 0.5:
        return (0.5, 0.75)
    i = min(int(math.floor(-math.log2(y))), params.depth + 1) if y > 0 else params.depth + 1
    # 2^-(i+1) < y <= 2^-i, with everything below the deepest slit lumped together
    if x > 1.0 - 2.0**-i:
        return (1.0 - 2.0**-i, 3.0 * 2.0 ** -(i + 2))
    return None


def john_route(p, params: CuspParams) -> np.ndarray:
    """Polyline from ``p`` to ``X0``, through a hub below the slit that overhangs ``p``."""
    dom = john_region(params)
    if dom.locate((float(p[0]), float(p[1]))) is not Location.INSIDE:
        raise ValueError(f"{tuple(p)} is not an interior point")
    pts = [(float(p[0]), float(p[1]))]
    hub = _hub(p, params)
    if hub is not None and hub != pts[0]:
        pts.append(hub)
    if pts[-1] != X0:
        pts.append(X0)
    return np.array(pts)


def _sample_route(route: np.ndarray, per_segment: int) -> tuple[np.ndarray, np.ndarray]:
    """Points along the route (excluding the start) and their arclength from the start."""
    pts, arc = [], []
    s0 = 0.0
    for a, b in zip(route[:-1], route[1:]):
        L = float(np.hypot(*(b - a)))
        t = np.arange(1, per_segment + 1) / per_segment
        pts.append(a + t[:, None] * (b - a))
        arc.append(s0 + t * L)
        s0 += L
    return np.vstack(pts), np.concatenate(arc)


def sample_interior(params: CuspParams, n: int, seed: int) -> np.ndarray:
    """``n`` uniform interior points by rejection from the unit square."""
    dom = john_region(params)
    rng = np.random.default_rng(seed)
    out = []
    while sum(len(o) for o in out) < n:
        cand = rng.random((2 * n, 2))
        out.append(cand[dom.locate_many(cand) == Location.INSIDE])
    return np.vstack(out)[:n]


@dataclass(frozen=True)
class JohnReport:
    J_hat: float
    worst_point: tuple
    routes_checked: int
    all_interior: bool


def john_constant_estimate(params: CuspParams, samples: int, seed: int, *, per_segment: int = 100) -> JohnReport:
    """Minimum of ``dist(route(t), boundary) / t`` over sampled starts and route points.

    Every sampled route point is also located, so ``all_interior`` certifies
    that the routes stay in the domain.
    """
    dom = john_region(params)
    worst = (math.inf, None)
    ok = True
    for p in sample_interior(params, samples, seed):
        route = john_route(p, params)
        pts, arc = _sample_route(route, per_segment)
        d, _, _ = dom.index.nearest_many(pts)
        ratio = d / arc
        k = int(np.argmin(ratio))
        if ratio[k] < worst[0]:
            worst = (float(ratio[k]), (float(p[0]), float(p[1])))
        loc = dom.locate_many(np.vstack([route, pts]))
        ok &= bool(np.all(loc == Location.INSIDE))
    return JohnReport(worst[0], worst[1], samples, ok)
