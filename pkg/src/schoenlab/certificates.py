"""Lower-bound witnesses for the extension energy of both constructions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .cantor_comb import CombParams, t1_domain_polygon
from .cusp_john import CuspParams, john_domain, xi
from .harmonic import Estimate, WoSConfig, floor_classifier, require_resolved, wos_measure
from .inner_metric import PolyDomain, exterior_descent, geodesic

T1_BASE = (0.5, -0.5)


def t1_epsilon(n: int) -> float:
    """Absorption distance for depth ``n``: half the smallest side-tooth dimension."""
    return 2.0 ** -(2 * n + 6)


@dataclass(frozen=True)
class T1Certificate:
    depth: int
    omega_hat: Estimate
    D_n: float
    LB: float
    seed: int
    rho: Fraction
    epsilon: float
    samples: int
    target: tuple[float, float]

    def row(self) -> dict:
        return {
            "n": self.depth, "omega_mean": self.omega_hat.mean, "omega_stderr": self.omega_hat.stderr,
            "unresolved_fraction": self.omega_hat.unresolved_fraction, "D_n": self.D_n, "LB": self.LB,
            "seed": self.seed, "rho": str(self.rho), "epsilon": self.epsilon, "samples": self.samples,
        }


def harmonic_floor_measure(n: int, params: CombParams, cfg: WoSConfig) -> Estimate:
    """Harmonic measure of the floor ``y = 0`` of the depth-``n`` interior, seen from ``(1/2, -1/2)``."""
    dom = PolyDomain.interior(t1_domain_polygon(n, params.rho, side_teeth=params.side_teeth, check=False))
    return require_resolved(wos_measure(dom, T1_BASE, floor_classifier(dom), cfg))


def certify_t1(n: int, params: CombParams | None = None, cfg: WoSConfig | None = None, *, seed: int | None = None,
               samples: int = 100_000) -> T1Certificate:
    """``LB(n) = 2 pi omega_hat * D(n)``: preimage arc length of the floor times the exterior descent.

    Either pass a full ``cfg`` or a ``seed`` (the depth-adaptive epsilon is then used).
    """
    if not 1 <= n <= 6:
        raise ValueError("depth must be in 1..6")
    params = params or CombParams(n)
    if cfg is None:
        if seed is None:
            raise ValueError("a seed is required")
        cfg = WoSConfig(t1_epsilon(n), samples, seed)
    est = harmonic_floor_measure(n, params, cfg)
    D, target = exterior_descent(n, params)
    return T1Certificate(n, est, D, 2 * math.pi * est.mean * D, cfg.seed, params.rho, cfg.epsilon, cfg.samples, target)


# ---------------------------------------------------------------------------
# cusp slits


def _exact_inv_s(s: float) -> int | None:
    return CuspParams(s, 1.0, 0, 8).inv_s


def _exact_term(i: int, k: int, c: Fraction) -> Fraction:
    # xi(2^-i) = min(2^(-2i), C 2^(-i(1+k))); the second branch wins iff C < 2^(i(k-1))
    p = i * (k - 1)
    if k > 1 and (p > math.ceil(c).bit_length() or c < 2**p):
        return Fraction(1, 2 ** (1 + 3 * k)) / c
    return Fraction(2) ** (i * (1 - k) - 1 - 3 * k)


def _float_term(i: int, s: float, C: float) -> float:
    # log-space evaluation keeps deep terms finite
    log_xi = min(-2.0 * i, math.log2(C) - i * (1 + 1 / s))
    return 2.0 ** (-i - 1 - (i + 3) / s - log_xi)


def t2_term(i: int, s: float = 0.5, C: float = 1.0):
    """``2^(-i-1) 2^(-(i+3)/s) / xi(2^-i)``; a Fraction when ``1/s`` is an integer."""
    k = _exact_inv_s(s)
    return _exact_term(i, k, Fraction(C)) if k is not None else _float_term(i, s, C)


@dataclass(frozen=True)
class T2Certificate:
    s: float
    C: float
    N: int
    terms: list = field(repr=False)
    S_N: Fraction | float
    exact: bool

    def partial_sums(self) -> list:
        out, acc = [], 0
        for t in self.terms:
            acc += t
            out.append(acc)
        return out


def t2_partial_sum(N: int, s: float = 0.5, C: float = 1.0) -> T2Certificate:
    """Terms and partial sum of the slit energy series up to ``N``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    k = _exact_inv_s(s)
    exact = k is not None
    if exact:
        c = Fraction(C)
        terms = [_exact_term(i, k, c) for i in range(1, N + 1)]
    else:
        terms = [_float_term(i, s, C) for i in range(1, N + 1)]
    if exact:
        # every term is m / 2^e times a common 1/C factor: add numerators over one power of two
        scaled = [t * c for t in terms]
        e = max(q.denominator.bit_length() - 1 for q in scaled)
        total = Fraction(sum(q.numerator << (e - (q.denominator.bit_length() - 1)) for q in scaled), 1 << e) / c
    else:
        total = math.fsum(terms)
    return T2Certificate(s, C, N, terms, total, exact)


def xi_crossover(s: float, C: float) -> int:
    """First ``i`` from which ``xi(2^-i)`` uses the ``C t^(1+1/s)`` branch for good."""
    i = 1
    while C * 2.0 ** (-i * (1 + 1 / s)) > 2.0 ** (-2 * i):
        i += 1
    return i


@dataclass(frozen=True)
class SlitRatio:
    i: int
    inner_interior: float
    inner_exterior: float
    ratio: float
    a_mid: tuple
    b_mid: tuple


def slit_midpoints(i: int, params: CuspParams) -> tuple[tuple[float, float], tuple[float, float]]:
    """Midpoint of ``A_i`` and the point of ``B_i`` above it (a vertex of the sampled graph)."""
    x = 1.0 - 2.0 ** -(i + 2)
    y = 2.0**-i
    yb = y + float(xi(Fraction(3, 2 ** (i + 2)), params.s, params.C)) if params.exact else y + xi(3 * 2.0 ** -(i + 2), params.s, params.C)
    return (x, y), (x, yb)


def t2_distance_ratio(i: int, params: CuspParams | None = None) -> SlitRatio:
    """Inner distances between the slit arcs: through the wedge versus around the cusp tip."""
    params = params or CuspParams()
    if not 1 <= i <= min(params.depth, 8):
        raise ValueError("slit index must be in 1..min(depth, 8)")
    if params.arc_samples % 4:
        raise ValueError("arc_samples must be a multiple of 4 so the B_i midpoint is a vertex")
    poly = john_domain(params)
    a, b = slit_midpoints(i, params)
    ext = geodesic(PolyDomain.exterior_boxed(poly), a, b).length
    inn = geodesic(PolyDomain.interior(poly), a, b).length
    return SlitRatio(i, inn, ext, inn / ext, a, b)


def eta_bound(t, s: float, C: float) -> float:
    """``C max(t^s, t^(1/s))``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    return C * max(t**s, t ** (1 / s))
