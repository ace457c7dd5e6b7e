"""Harmonic measure: walk-on-spheres, Poisson quadrature on the disk, and a grid
Laplace solver on the square ``Q = [0, 1] x [-1, 0]``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numba
import numpy as np
from scipy import fft, integrate

from .inner_metric import Location, PolyDomain
from .spatial import nearest_segment

TWO_PI = 2.0 * math.pi


class UnresolvedWalksError(RuntimeError):
    pass


class GridSolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class UnitDisk:
    """The open unit disk; boundary points are handled analytically."""

    def contains(self, p) -> bool:
        return p[0] * p[0] + p[1] * p[1] < 1.0


@dataclass(frozen=True)
class WoSConfig:
    epsilon: float
    samples: int
    seed: int
    max_steps: int = 10_000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.samples < 1 or self.max_steps < 1:
            raise ValueError("samples and max_steps must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Estimate:
    mean: float
    stderr: float
    n: int
    unresolved_fraction: float

    def to_json(self, **extra) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n,
                "unresolved_fraction": self.unresolved_fraction, **extra}


@dataclass(frozen=True)
class ShardStats:
    """Sufficient statistics of a block of walks."""

    hits: int
    resolved: int
    unresolved: int

    def __add__(self, other: "ShardStats") -> "ShardStats":
        return ShardStats(self.hits + other.hits, self.resolved + other.resolved, self.unresolved + other.unresolved)

    def estimate(self) -> Estimate:
        n = self.resolved
        mean = self.hits / n if n else 0.0
        stderr = math.sqrt(mean * (1.0 - mean) / n) if n else math.inf
        total = n + self.unresolved
        return Estimate(mean, stderr, n, self.unresolved / total if total else 0.0)


# ---------------------------------------------------------------------------
# counter-based random numbers: one independent stream per (seed, walk index)

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


@numba.njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


@numba.njit(cache=True, inline="always")
def _uniform(key, counter):
    z = _mix(key + counter * _GOLDEN)
    return np.float64(z >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@numba.njit(cache=True, parallel=True)
def _walks(disk, segs, order, box, child, span, x0, y0, eps, max_steps, seed, first, count):
    ends = np.empty((count, 2))
    seg_id = np.full(count, -1, dtype=np.int64)
    ok = np.zeros(count, dtype=np.bool_)
    for w in numba.prange(count):
        key = _mix(np.uint64(seed) ^ _mix(np.uint64(first + w) + _GOLDEN))
        x = x0
        y = y0
        for step in range(max_steps):
            if disk:
                r = math.sqrt(x * x + y * y)
                d = 1.0 - r
                if r > 0.0:
                    qx = x / r
                    qy = y / r
                else:
                    qx = 1.0
                    qy = 0.0
                s = -1
            else:
                d, qx, qy, s = nearest_segment(x, y, segs, order, box, child, span)
            if d < eps:
                ends[w, 0] = qx
                ends[w, 1] = qy
                seg_id[w] = s
                ok[w] = True
                break
            theta = 2.0 * math.pi * _uniform(key, np.uint64(step))
            x += d * math.cos(theta)
            y += d * math.sin(theta)
    return ends, seg_id, ok


Classifier = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _check_start(domain, x0):
    if isinstance(domain, UnitDisk):
        if not domain.contains(x0):
            raise ValueError("x0 must lie in the open unit disk")
        return
    if domain.kind != "interior" or domain.locate(x0) is not Location.INSIDE:
        raise ValueError("x0 must lie in the interior of a bounded domain")


def wos_shard(domain, x0, classifier: Classifier, cfg: WoSConfig, first: int, count: int) -> ShardStats:
    """Run walks ``first .. first+count-1``; each walk's randomness depends only on (seed, index)."""
    _check_start(domain, x0)
    if isinstance(domain, UnitDisk):
        arrays = (np.zeros((1, 4)), np.zeros(1, np.int64), np.zeros((1, 4)), -np.ones((1, 2), np.int64), np.zeros((1, 2), np.int64))
        disk = True
    else:
        arrays = domain.index.arrays
        disk = False
    ends, seg_id, ok = _walks(disk, *arrays, float(x0[0]), float(x0[1]), float(cfg.epsilon), int(cfg.max_steps),
                              np.uint64(cfg.seed), int(first), int(count))
    hit = np.asarray(classifier(ends[ok], seg_id[ok]), dtype=bool)
    return ShardStats(int(hit.sum()), int(ok.sum()), int((~ok).sum()))


def wos_measure(domain, x0, classifier: Classifier, cfg: WoSConfig, *, shards: int = 1) -> Estimate:
    """Walk-on-spheres estimate of the harmonic measure of the classified target.

    Unresolved walks (those reaching ``max_steps``) are excluded from the mean
    and reported in ``unresolved_fraction``. The result does not depend on
    ``shards``.
    """
    bounds = np.linspace(0, cfg.samples, max(1, shards) + 1).astype(int)
    total = ShardStats(0, 0, 0)
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b > a:
            total = total + wos_shard(domain, x0, classifier, cfg, int(a), int(b - a))
    return total.estimate()


def require_resolved(est: Estimate, limit: float = 1e-3) -> Estimate:
    """Reject estimates whose unresolved share is too large to trust."""
    if not est.unresolved_fraction < limit:
        raise UnresolvedWalksError(f"{est.unresolved_fraction:.2e} of walks hit max_steps (limit {limit:.0e})")
    return est


def preimage_arc_length(domain, x0, classifier: Classifier, cfg: WoSConfig) -> tuple[float, float, Estimate]:
    """Angular length of the target's conformal preimage on the unit circle: ``2 pi`` times the measure."""
    est = wos_measure(domain, x0, classifier, cfg)
    return TWO_PI * est.mean, TWO_PI * est.stderr, est


# ---------------------------------------------------------------------------
# classifiers: (nearest boundary points, segment ids) -> bool


def arc_classifier(a: float, b: float) -> Classifier:
    """Unit-circle points with angle in ``[a, b]`` (taken modulo 2 pi, ``b - a <= 2 pi``)."""
    width = b - a

    def classify(pts, seg_ids):
        ang = np.mod(np.arctan2(pts[:, 1], pts[:, 0]) - a, TWO_PI)
        return ang <= width

    return classify


def complement(classifier: Classifier) -> Classifier:
    def classify(pts, seg_ids):
        return ~np.asarray(classifier(pts, seg_ids), dtype=bool)

    return classify


def floor_classifier(domain: PolyDomain, intervals: Sequence[tuple] | None = None) -> Classifier:
    """Horizontal boundary edges at ``y = 0``, optionally restricted to x in a union of intervals."""
    segs = domain.segments
    floor = (segs[:, 1] == 0.0) & (segs[:, 3] == 0.0)
    iv = None if intervals is None else np.array([[float(a), float(b)] for a, b in intervals])

    def classify(pts, seg_ids):
        hit = floor[seg_ids]
        if iv is not None:
            x = pts[:, 0]
            inside = ((x[:, None] >= iv[:, 0]) & (x[:, None] <= iv[:, 1])).any(axis=1)
            hit &= inside
        return hit

    return classify


def top_side_classifier(domain: PolyDomain) -> Classifier:
    """For the square Q: the side ``y = 0``."""
    return floor_classifier(domain)


# ---------------------------------------------------------------------------
# disk quadrature


def poisson_disk(x0, arc: tuple[float, float]) -> float:
    """Harmonic measure of an arc of the unit circle seen from ``x0`` (Poisson kernel quadrature)."""
    z = complex(x0[0], x0[1])
    r2 = abs(z) ** 2
    if r2 >= 1.0:
        raise ValueError("x0 must lie in the open unit disk")
    a, b = float(arc[0]), float(arc[1])

    def kernel(t):
        return (1.0 - r2) / (TWO_PI * abs(complex(math.cos(t), math.sin(t)) - z) ** 2)

    # split at the angle of x0 where the kernel peaks
    peak = math.atan2(z.imag, z.real)
    pts = [peak + TWO_PI * k for k in range(-2, 3) if a < peak + TWO_PI * k < b]
    val, _ = integrate.quad(kernel, a, b, points=pts or None, epsabs=1e-13, epsrel=1e-12, limit=500)
    return float(val)


# ---------------------------------------------------------------------------
# grid Laplace oracle on Q


def _top_data(target: Sequence[tuple], nodes: int, h: Fraction) -> np.ndarray:
    """Boundary value at each top node: share of its dual cell covered by the target."""
    g = np.zeros(nodes + 1)
    for i in range(nodes + 1):
        x = i * h
        lo, hi = max(x - h / 2, Fraction(0)), min(x + h / 2, Fraction(1))
        covered = sum(max(Fraction(0), min(hi, Fraction(b)) - max(lo, Fraction(a))) for a, b in target)
        g[i] = float(covered / (hi - lo))
    return g


def grid_laplace_square(target: Sequence[tuple], h: float = 2.0**-10, tol: float = 1e-10) -> float:
    """Discrete harmonic measure at ``(1/2, -1/2)`` of ``target`` (intervals on the top side of Q).

    The 5-point Dirichlet problem is solved directly by a sine transform;
    the residual is then checked against ``tol``.
    """
    hf = Fraction(h)
    N = 1 / hf
    if N.denominator != 1 or N % 2 or h > 2.0**-10:
        raise ValueError("h must be 2^-k with k >= 10")
    N = int(N)
    g = _top_data([(Fraction(a), Fraction(b)) for a, b in target], N, hf)
    # unknowns u[j, i]: j = 1..N-1 rows from the top, i = 1..N-1 columns
    rhs = np.zeros((N - 1, N - 1))
    rhs[0, :] = g[1:N]
    k = np.arange(1, N)
    lam = 2.0 - 2.0 * np.cos(np.pi * k / N)
    u = fft.idstn(fft.dstn(rhs, type=1) / (lam[:, None] + lam[None, :]), type=1)
    pad = np.zeros((N + 1, N + 1))
    pad[1:N, 1:N] = u
    pad[0, :] = g
    res = 4 * pad[1:N, 1:N] - pad[:-2, 1:N] - pad[2:, 1:N] - pad[1:N, :-2] - pad[1:N, 2:]
    err = float(np.abs(res).max())
    if not err < tol:
        raise GridSolveError(f"residual {err:.3e} exceeds tolerance {tol:.1e}")
    return float(pad[N // 2, N // 2])
