"""Fat Cantor stages and the comb curves built on them.

Stage ``i`` intervals are stored as integers over ``2**(2i+1)``: splitting a
stage-``g`` interval ``[a, b]`` removes ``4**-(g+1)`` from its middle, which in
units of ``2**-(2g+3)`` sends ``[a, b]`` to ``[4a, 2a+2b-1]`` and
``[2a+2b+1, 4b]``.  Every length is then exactly ``2**i + 1`` units.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exact_geometry import Dyadic, JordanPolygon, require_simple

MAX_STAGE = 30  # 2i+1 <= 61 keeps stage endpoints in int64


@dataclass(frozen=True)
class CantorStage:
    """Stage ``i``: ``left[j], right[j]`` are interval ends in units of ``2**-exponent``."""

    i: int
    left: np.ndarray
    right: np.ndarray
    #: gaps[g] = (lo, hi, exponent) for the open gaps removed from stage g
    gaps: tuple[tuple[np.ndarray, np.ndarray, int], ...]

    @property
    def exponent(self) -> int:
        return 2 * self.i + 1

    @property
    def intervals(self) -> list[tuple[Dyadic, Dyadic]]:
        e = self.exponent
        return [(Dyadic(int(a), e), Dyadic(int(b), e)) for a, b in zip(self.left, self.right)]

    def gap_list(self) -> list[tuple[Dyadic, Dyadic, int]]:
        """All gaps removed so far as ``(lo, hi, generation)``, sorted by position."""
        out = []
        for g, (lo, hi, e) in enumerate(self.gaps):
            out.extend((Dyadic(int(a), e), Dyadic(int(b), e), g) for a, b in zip(lo, hi))
        out.sort(key=lambda t: t[0])
        return out

    def measure(self) -> Fraction:
        return Fraction(int(np.sum(self.right - self.left)), 1 << self.exponent)

    def contains(self, x) -> bool:
        """Closed membership of a real (or Dyadic) ``x`` in ``C_i``."""
        fx = Fraction(x.as_fraction() if isinstance(x, Dyadic) else x)
        scaled = fx * (1 << self.exponent)
        j = int(np.searchsorted(self.right, int(np.ceil(float(scaled))) - 1, side="left"))
        for k in (j - 1, j, j + 1):
            if 0 <= k < len(self.left) and self.left[k] <= scaled <= self.right[k]:
                return True
        return False

    def interval_floats(self) -> np.ndarray:
        """(2**i, 2) float array of interval ends."""
        return np.ldexp(np.stack([self.left, self.right], axis=1).astype(float), -self.exponent)


@lru_cache(maxsize=None)
def stage(i: int) -> CantorStage:
    if not 0 <= i <= MAX_STAGE:
        raise ValueError(f"stage index must lie in [0, {MAX_STAGE}] for exact int64 storage")
    left = np.array([0], dtype=np.int64)
    right = np.array([2], dtype=np.int64)  # [0, 1] in units of 2**-1
    gaps = []
    for g in range(i):
        s = 2 * left + 2 * right
        gaps.append((s - 1, s + 1, 2 * g + 3))
        new_left = np.empty(2 * len(left), dtype=np.int64)
        new_right = np.empty_like(new_left)
        new_left[0::2] = 4 * left
        new_right[0::2] = s - 1
        new_left[1::2] = s + 1
        new_right[1::2] = 4 * right
        left, right = new_left, new_right
    return CantorStage(i, left, right, tuple(gaps))


def interval_length(i: int) -> Fraction:
    return Fraction(2**i + 1, 2 ** (2 * i + 1))


def corridor_width(m: int) -> Fraction:
    """Width of a band-``m`` corridor (a stage-``m+1`` interval)."""
    return interval_length(m + 1)


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class Polyline:
    """Open chain ``ints * 2**-exponent`` from (0,0) to (1,0)."""

    ints: np.ndarray
    exponent: int

    @property
    def xy(self) -> np.ndarray:
        return np.ldexp(self.ints.astype(float), -self.exponent)

    def __len__(self):
        return len(self.ints)

    @property
    def vertices(self) -> list[tuple[Dyadic, Dyadic]]:
        e = self.exponent
        return [(Dyadic(int(x), e), Dyadic(int(y), e)) for x, y in self.ints]


@dataclass(frozen=True)
class Tooth:
    lo: Fraction
    hi: Fraction
    generation: int

    @property
    def height(self) -> Fraction:
        return Fraction(1, 2**self.generation)


def teeth(i: int) -> list[Tooth]:
    """Teeth of ``gamma(i)``: one per gap of generation ``<= i-1``, left to right."""
    if i <= 0:
        return []
    st = stage(i)
    return [Tooth(lo.as_fraction(), hi.as_fraction(), g) for lo, hi, g in st.gap_list()]


def _to_units(value: Fraction, exponent: int) -> int:
    scaled = value * (1 << exponent)
    if scaled.denominator != 1:
        raise ValueError(f"{value} is not a multiple of 2**-{exponent}")
    return int(scaled)


def gamma(i: int) -> Polyline:
    """Rectangular teeth of height ``2**-g`` over every gap of generation ``g <= i-1``."""
    e = max(2 * i + 1, 1)
    pts = [(0, 0)]
    for t in teeth(i):
        a, b, h = (_to_units(v, e) for v in (t.lo, t.hi, t.height))
        pts += [(a, 0), (a, h), (b, h), (b, 0)]
    pts.append((1 << e, 0))
    return Polyline(np.array(pts, dtype=np.int64), e)


@dataclass(frozen=True)
class CombParams:
    """Decorated bands ``1..depth``; side-teeth reach ``rho`` of the corridor width."""

    depth: int
    rho: Fraction = Fraction(3, 4)
    side_teeth: bool = True

    def __post_init__(self):
        rho = Fraction(self.rho)
        object.__setattr__(self, "rho", rho)
        if self.depth < 0:
            raise ValueError("depth must be non-negative")
        if self.side_teeth and not Fraction(1, 2) < rho < 1:
            raise ValueError("rho must lie strictly between 1/2 and 1")
        if rho.denominator & (rho.denominator - 1):
            raise ValueError("rho must be dyadic")


def slot_delta(m: int) -> Fraction:
    return Fraction(1, 2 ** (2 * m + 3))


def side_slots(m: int, side: str) -> list[tuple[Fraction, Fraction]]:
    """y-ranges of band-``m`` side-teeth on a left (``"left"``) or right wall.

    Slots sit half a slot above the nominal ``4k`` / ``4k+2`` grid so the lowest
    one clears the next generation's tooth top at the band floor.
    """
    base = Fraction(1, 2 ** (m + 1))
    d = slot_delta(m)
    off = Fraction(1, 2) if side == "left" else Fraction(5, 2)
    return [(base + (4 * k + off) * d, base + (4 * k + off + 1) * d) for k in range(2**m)]


def comb_exponent(params: CombParams) -> int:
    n = params.depth
    e_rho = params.rho.denominator.bit_length() - 1
    return max(2 * n + 4, 2 * n + 3 + e_rho, 2 * (n + 1) + 1)


def _slot_units(m: int, e: int, side: str) -> tuple[np.ndarray, np.ndarray]:
    half = 1 << (e - 2 * m - 4)  # half a slot height
    base = 1 << (e - m - 1)
    k = np.arange(2**m, dtype=np.int64)
    lo = base + (8 * k + (1 if side == "left" else 5)) * half
    return lo, lo + 2 * half


def _wall_block(x: int, m: int, e: int, rho: Fraction, side: str) -> np.ndarray:
    """Side-teeth vertices on one wall for band ``m``, in traversal order."""
    ext = _to_units(rho * corridor_width(m), e)
    lo, hi = _slot_units(m, e, side)
    block = np.empty((len(lo), 4, 2), dtype=np.int64)
    if side == "left":
        tip = x - ext
        ys = (lo, lo, hi, hi)
    else:
        tip = x + ext
        lo, hi = lo[::-1], hi[::-1]
        ys = (hi, hi, lo, lo)
    for c, (xx, yy) in enumerate(zip((x, tip, tip, x), ys)):
        block[:, c, 0] = xx
        block[:, c, 1] = yy
    return block.reshape(-1, 2)


def big_gamma(params: CombParams | int) -> Polyline:
    """``gamma(n+1)`` with side-teeth on every tooth wall crossing bands ``1..n``."""
    if isinstance(params, int):
        params = CombParams(params)
    n = params.depth
    e = comb_exponent(params)
    one = 1 << e
    pts: list[np.ndarray] = [np.array([[0, 0]], dtype=np.int64)]
    for t in teeth(n + 1):
        a, b, h = (_to_units(v, e) for v in (t.lo, t.hi, t.height))
        bands = range(max(t.generation, 1), n + 1) if params.side_teeth else range(0)
        # left wall, bottom to top: deepest band first
        pts.append(np.array([[a, 0]], dtype=np.int64))
        for m in reversed(bands):
            pts.append(_wall_block(a, m, e, params.rho, "left"))
        pts.append(np.array([[a, h], [b, h]], dtype=np.int64))
        # right wall, top to bottom: shallowest band first
        for m in bands:
            pts.append(_wall_block(b, m, e, params.rho, "right"))
        pts.append(np.array([[b, 0]], dtype=np.int64))
    pts.append(np.array([[one, 0]], dtype=np.int64))
    return Polyline(np.concatenate(pts), e)


def close_jordan(curve: Polyline, *, check: bool = True) -> JordanPolygon:
    """Append the left, bottom and right sides of ``[0,1] x [-1,0]``."""
    one = 1 << curve.exponent
    if tuple(curve.ints[0]) != (0, 0) or tuple(curve.ints[-1]) != (one, 0):
        raise ValueError("curve must run from (0,0) to (1,0)")
    ints = np.concatenate([curve.ints, np.array([[one, -one], [0, -one]], dtype=np.int64)])
    poly = JordanPolygon(ints, curve.exponent, exact=True)
    if check:
        require_simple(poly)
    return poly


def t1_domain_polygon(depth: int, rho=Fraction(3, 4), *, side_teeth: bool = True, check: bool = True) -> JordanPolygon:
    """Closed comb polygon at the given depth (``depth == 0`` is ``gamma(1)``)."""
    return close_jordan(big_gamma(CombParams(depth, rho, side_teeth)), check=check)


# ---------------------------------------------------------------------------
# census helpers


def band_probe_height(m: int) -> Fraction:
    """A height inside band ``m`` that avoids every side-tooth slot."""
    return Fraction(1, 2 ** (m + 1)) + 2 * slot_delta(m)


def wall_crossings(curve: Polyline, y: Fraction) -> np.ndarray:
    """Sorted x-units where vertical edges of ``curve`` cross the level ``y``."""
    yy = _to_units(y, curve.exponent)
    a, b = curve.ints[:-1], curve.ints[1:]
    vert = a[:, 0] == b[:, 0]
    lo = np.minimum(a[:, 1], b[:, 1])
    hi = np.maximum(a[:, 1], b[:, 1])
    hit = vert & (lo < yy) & (yy < hi)
    return np.sort(a[hit, 0])


def band_census(curve: Polyline, m: int) -> tuple[int, list[Fraction]]:
    """Teeth crossing band ``m`` and the widths of the corridors between them."""
    xs = wall_crossings(curve, band_probe_height(m))
    if len(xs) % 2:
        raise ValueError("unpaired wall crossing")
    e = curve.exponent
    bounds = [0] + xs.tolist() + [1 << e]
    widths = [Fraction(bounds[k + 1] - bounds[k], 1 << e) for k in range(0, len(bounds), 2)]
    return len(xs) // 2, widths


def walled_corridors(m: int) -> list[tuple[Fraction, Fraction]]:
    """Band-``m`` corridors whose ancestors are walled on both sides at every band.

    The outermost corridors of each band open onto ``x < 0`` or ``x > 1`` and
    cost nothing to enter, so descent measurements only target the corridors
    nested in the two inner band-1 corridors ``[7/32, 3/8]`` and ``[5/8, 25/32]``.
    """
    st = stage(m + 1)
    out = []
    for a, b in st.intervals:
        fa, fb = a.as_fraction(), b.as_fraction()
        if Fraction(7, 32) <= fa and fb <= Fraction(3, 8) or Fraction(5, 8) <= fa and fb <= Fraction(25, 32):
            out.append((fa, fb))
    return out


def floor_midpoints(depth: int, *, walled_only: bool = False) -> list[tuple[Fraction, Fraction]]:
    """Midpoints of the floor segments (y = 0) of the depth-``depth`` comb."""
    intervals = walled_corridors(depth) if walled_only else [
        (a.as_fraction(), b.as_fraction()) for a, b in stage(depth + 1).intervals
    ]
    return [((a + b) / 2, Fraction(0)) for a, b in intervals]
