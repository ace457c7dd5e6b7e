import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schoenlab.cantor_comb import big_gamma, close_jordan, gamma
from schoenlab.exact_geometry import (
    Dyadic,
    DyadicOverflowError,
    JordanPolygon,
    Ordering,
    Orientation,
    SimplicityError,
    brute_force_is_simple,
    chordal,
    dy_arith,
    orient,
    polygon_is_simple,
    require_simple,
    stereo,
    stereo_inv,
)

dyadics = st.builds(Dyadic, st.integers(-(2**70), 2**70), st.integers(0, 90))


# --- arithmetic ---------------------------------------------------------------


def test_add_three_eighths_and_quarter():
    assert dy_arith(Dyadic(3, 3), Dyadic(1, 2), "add") == Dyadic(5, 3)


def test_product_five_sixty_fourths():
    r = dy_arith(Dyadic(5, 5), Dyadic(1, 1), "mul")
    assert (r.mantissa, r.exponent) == (5, 6)


def test_tiny_positive_compares_greater_than_zero():
    assert dy_arith(Dyadic(1, 41), Dyadic(0), "cmp") is Ordering.GREATER


def test_canonical_form_is_unique():
    assert Dyadic(12, 5).to_pair() == Dyadic(3, 3).to_pair() == [3, 3]
    assert Dyadic(0, 9).to_pair() == [0, 0]
    assert Dyadic(4, 0).to_pair() == [4, 0]


def test_from_value_rejects_non_dyadic():
    with pytest.raises(ValueError):
        Dyadic.from_value(Fraction(1, 3))


def test_overflow_is_reported_not_wrapped():
    big = Dyadic(1 << 3000)
    with pytest.raises(DyadicOverflowError):
        big * big


def test_random_triples_associate_and_distribute_exactly():
    rng = random.Random(2024)
    for _ in range(10_000):
        a, b, c = (Dyadic(rng.randint(-(2**80), 2**80), rng.randint(0, 100)) for _ in range(3))
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c


@given(dyadics, dyadics)
def test_cmp_agrees_with_rationals(a, b):
    expected = (a.as_fraction() > b.as_fraction()) - (a.as_fraction() < b.as_fraction())
    assert dy_arith(a, b, "cmp").value == expected


@given(dyadics, dyadics)
def test_subtraction_matches_fractions(a, b):
    assert (a - b).as_fraction() == a.as_fraction() - b.as_fraction()


# --- orientation ----------------------------------------------------------------


def test_orient_examples():
    assert orient((0, 0), (1, 0), (0, 1)) is Orientation.LEFT
    assert orient((0, 0), (1, 1), (2, 2)) is Orientation.COLLINEAR
    assert orient((0, 0), (1, 0), (1, Dyadic(-1, 40))) is Orientation.RIGHT


points = st.tuples(dyadics, dyadics)


@given(points, points, points)
def test_orient_antisymmetric(p, q, r):
    assert orient(p, q, r).value == -orient(p, r, q).value


@given(points, points, points, points)
def test_orient_translation_invariant(p, q, r, t):
    shift = lambda v: (v[0] + t[0], v[1] + t[1])  # noqa: E731
    assert orient(p, q, r) is orient(shift(p), shift(q), shift(r))


# --- simplicity -------------------------------------------------------------------


def square():
    return JordanPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])


def test_unit_square_is_simple():
    poly = square()
    assert polygon_is_simple(poly)
    assert poly.simplicity_checked


def test_bow_tie_reports_violating_pair():
    res = polygon_is_simple(JordanPolygon.from_points([(0, 0), (1, 1), (1, 0), (0, 1)]))
    assert not res
    assert res.pair is not None and res.segments is not None
    with pytest.raises(SimplicityError):
        require_simple(JordanPolygon.from_points([(0, 0), (1, 1), (1, 0), (0, 1)]))


def test_closed_decorated_comb_depth_two_is_simple():
    assert polygon_is_simple(close_jordan(big_gamma(2), check=False))


def test_polygons_are_stored_counterclockwise():
    cw = JordanPolygon.from_points([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert cw.area() == 1


def random_polygon(rng, m, grid=8):
    pts = set()
    while len(pts) < m:
        pts.add((rng.randint(0, grid), rng.randint(0, grid)))
    pts = list(pts)
    rng.shuffle(pts)
    return [(Fraction(x, 4), Fraction(y, 4)) for x, y in pts]


def star_polygon(rng, m):
    angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(m))
    return [(Fraction(round(64 * (1 + rng.uniform(0.3, 1) * math.cos(a)))), Fraction(round(64 * (1 + rng.uniform(0.3, 1) * math.sin(a)))))
            for a in angles]


def corpus():
    rng = random.Random(5)
    polys = [square(), close_jordan(gamma(1), check=False), close_jordan(gamma(3), check=False),
             close_jordan(big_gamma(1), check=False)]
    for m in (4, 5, 6, 8, 12, 20):
        for _ in range(15):
            polys.append(JordanPolygon.from_points(random_polygon(rng, m)))
    for m in (10, 50, 120, 200):
        for _ in range(5):
            pts = star_polygon(rng, m)
            dedup = [p for k, p in enumerate(pts) if p != pts[k - 1]]
            if len(dedup) >= 3:
                polys.append(JordanPolygon.from_points(dedup))
    return polys


def test_sweep_matches_brute_force_on_corpus():
    seen = {True: 0, False: 0}
    for poly in corpus():
        if len(poly) > 200:
            continue
        fast = polygon_is_simple(poly).simple
        assert fast == brute_force_is_simple(poly).simple, poly
        seen[fast] += 1
    assert seen[True] > 5 and seen[False] > 5


def test_orthogonal_and_general_paths_agree():
    # a float polygon takes the general sweep even when axis-parallel
    poly = close_jordan(big_gamma(2), check=False)
    general = JordanPolygon.from_points([(float(x), float(y)) for x, y in poly.xy])
    assert polygon_is_simple(general).simple
    assert polygon_is_simple(general).caveat


# --- sphere -------------------------------------------------------------------------


def test_origin_maps_to_south_pole():
    assert stereo((0, 0)) == (0.0, 0.0, -1.0)


def test_stereo_round_trip():
    x, y = stereo_inv(stereo((0.5, 2.0)))
    assert x == pytest.approx(0.5, abs=1e-15) and y == pytest.approx(2.0, abs=1e-15)


def test_north_pole_rejected():
    with pytest.raises(ValueError):
        stereo_inv((0.0, 0.0, 1.0))


def test_chordal_ratio_in_unit_interval():
    r = chordal((0, 0), (1, 0)) / 1.0
    assert 0 < r <= 1
    # independent route: half the Euclidean chord between the sphere images
    P, Q = np.array(stereo((0, 0))), np.array(stereo((1, 0)))
    assert r == pytest.approx(np.linalg.norm(P - Q) / 2, rel=1e-15)


@settings(max_examples=200)
@given(st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50))
def test_chordal_never_exceeds_euclidean(a, b, c, d):
    assert chordal((a, b), (c, d)) <= math.hypot(a - c, b - d) * (1 + 1e-12)
    x, y = stereo_inv(stereo((a, b)))
    assert x == pytest.approx(a, abs=1e-9) and y == pytest.approx(b, abs=1e-9)
