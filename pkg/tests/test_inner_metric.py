import math
from fractions import Fraction

import numpy as np
import pytest
import shapely
from scipy.sparse import lil_matrix
from scipy.sparse.csgraph import dijkstra

from schoenlab.cantor_comb import CombParams, close_jordan, floor_midpoints, gamma, t1_domain_polygon
from schoenlab.cusp_john import CuspParams, john_domain
from schoenlab.exact_geometry import JordanPolygon
from schoenlab.inner_metric import (
    BoundaryPointError,
    DisconnectedQueryError,
    GridResolutionError,
    Location,
    PolyDomain,
    band_descent_cost,
    dist_to_boundary,
    geodesic,
    grid_geodesic,
)
from schoenlab.spatial import SegmentIndex, brute_force_nearest

SQUARE = JordanPolygon.from_points([(0, 0), (1, 0), (1, 1), (0, 1)])
L_SHAPE = JordanPolygon.from_points([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])


def domains():
    return {
        "square": PolyDomain.interior(SQUARE),
        "l-shape": PolyDomain.interior(L_SHAPE),
        "square-exterior": PolyDomain.exterior_boxed(SQUARE),
        "comb-2": PolyDomain.interior(t1_domain_polygon(2)),
        "comb-2-exterior": PolyDomain.exterior_boxed(t1_domain_polygon(2)),
        "cusp-3": PolyDomain.interior(john_domain(CuspParams(depth=3, arc_samples=16))),
    }


DOMAINS = domains()


def sample_inside(dom, n, seed):
    rng = np.random.default_rng(seed)
    segs = dom.segments
    lo = segs[:, [0, 1]].min(axis=0)
    hi = segs[:, [0, 1]].max(axis=0)
    out = []
    while sum(len(o) for o in out) < n:
        cand = lo + (hi - lo) * rng.random((4 * n, 2))
        out.append(cand[dom.locate_many(cand) == Location.INSIDE])
    return np.vstack(out)[:n]


# --- location ---------------------------------------------------------------------


def test_contains_examples():
    assert PolyDomain.interior(SQUARE).contains((0.5, 0.5))
    assert not PolyDomain.exterior_boxed(SQUARE).contains((0.5, 0.5))
    assert PolyDomain.interior(close_jordan(gamma(1))).contains((0.5, 0.5))


def test_boundary_points_are_flagged():
    dom = PolyDomain.interior(SQUARE)
    assert dom.locate((1, 0.5)) is Location.BOUNDARY
    with pytest.raises(BoundaryPointError):
        dom.contains((0, 0))


def test_location_matches_shapely_on_random_points():
    for name, dom in DOMAINS.items():
        region = shapely.Polygon(dom.boundary.xy)
        rng = np.random.default_rng(3)
        pts = rng.uniform(-0.2, 2.2, size=(3000, 2))
        got = dom.locate_many(pts)
        inside_poly = shapely.contains_xy(region, pts[:, 0], pts[:, 1])
        expect = inside_poly if dom.kind == "interior" else ~inside_poly
        ok = got != Location.BOUNDARY
        assert np.array_equal(got[ok] == Location.INSIDE, expect[ok]), name


def test_exact_location_at_tiny_offsets():
    dom = PolyDomain.interior(SQUARE)
    assert dom.locate((Fraction(1, 2), Fraction(-1, 2**200))) is Location.OUTSIDE
    assert dom.locate((Fraction(1, 2), Fraction(1, 2**200))) is Location.INSIDE


# --- distance to boundary -----------------------------------------------------------


def test_distance_examples():
    d, _, _ = dist_to_boundary((0.5, 0.5), SQUARE)
    assert d == 0.5
    d, (qx, qy), _ = dist_to_boundary((0.5, 2.0), close_jordan(gamma(1)))
    assert d == 1.0 and qy == 1.0


def test_index_matches_brute_force():
    rng = np.random.default_rng(11)
    for dom in DOMAINS.values():
        segs = dom.segments
        for p in rng.uniform(-1, 2, size=(200, 2)):
            d, _, _ = dom.dist_to_boundary(p)
            assert d == pytest.approx(brute_force_nearest(segs, p)[0], abs=1e-15)


def test_index_on_random_segments():
    rng = np.random.default_rng(0)
    segs = rng.random((3000, 4))
    idx = SegmentIndex(segs)
    pts = rng.uniform(-0.5, 1.5, size=(300, 2))
    d, _, ids = idx.nearest_many(pts)
    for k, p in enumerate(pts):
        bd, _, bid = brute_force_nearest(segs, p)
        assert d[k] == pytest.approx(bd, abs=1e-15)
        assert brute_force_nearest(segs[ids[k]:ids[k] + 1], p)[0] == pytest.approx(bd, abs=1e-15)


def test_box_candidates_cover_every_overlapping_segment():
    rng = np.random.default_rng(1)
    segs = rng.random((2000, 4)) * 0.1 + rng.random((2000, 1)) * 0.9
    idx = SegmentIndex(segs)
    lo = np.minimum(segs[:, :2], segs[:, 2:])
    hi = np.maximum(segs[:, :2], segs[:, 2:])
    for x0, y0 in rng.random((50, 2)):
        x1, y1 = x0 + 0.1, y0 + 0.1
        truth = np.flatnonzero((lo[:, 0] <= x1) & (hi[:, 0] >= x0) & (lo[:, 1] <= y1) & (hi[:, 1] >= y0))
        assert set(truth) <= set(idx.candidates(x0, y0, x1, y1).tolist())


# --- geodesics ------------------------------------------------------------------------


def test_convex_interior_geodesic_is_straight():
    r = geodesic(DOMAINS["square"], (0.25, 0.25), (0.75, 0.75))
    assert r.length == pytest.approx(math.sqrt(2) / 2, rel=1e-12)
    assert r.method == "visibility"


def test_exterior_corner_detour():
    r = geodesic(DOMAINS["square-exterior"], (0.5, 1.25), (1.25, 0.5))
    assert r.length == pytest.approx(math.sqrt(5) / 2, rel=1e-12)
    assert [tuple(v) for v in r.path] == [(0.5, 1.25), (1.0, 1.0), (1.25, 0.5)]


def test_floor_midpoints_reachable_through_lower_square():
    for n in range(1, 5):
        dom = PolyDomain.interior(t1_domain_polygon(n))
        for x, y in floor_midpoints(n):
            assert geodesic(dom, (0.5, -0.5), (float(x), float(y))).length <= 1.01


def test_outside_query_is_rejected():
    with pytest.raises(DisconnectedQueryError):
        geodesic(DOMAINS["square"], (0.5, 0.5), (2.0, 2.0))


def visibility_oracle(dom, p, q):
    """Dijkstra over the full visibility graph of boundary vertices, tested with shapely."""
    region = shapely.Polygon(dom.boundary.xy)
    if dom.kind == "exterior":
        region = shapely.box(*dom.box).difference(region)
    shapely.prepare(region)
    nodes = np.vstack([[p, q], dom.segments[:, :2]])
    n = len(nodes)
    g = lil_matrix((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = nodes[i], nodes[j]
            if np.array_equal(a, b):
                continue
            if region.covers(shapely.LineString([a, b])):
                g[i, j] = g[j, i] = float(np.hypot(*(a - b)))
    return dijkstra(g.tocsr(), indices=0)[1]


@pytest.mark.parametrize("name", ["l-shape", "square-exterior", "comb-2", "cusp-3"])
def test_lengths_match_visibility_graph(name):
    dom = DOMAINS[name]
    if name == "comb-2":
        # the full visibility graph is quadratic: use the depth-1 comb
        dom = PolyDomain.interior(t1_domain_polygon(1))
    pts = sample_inside(dom, 8, seed=4)
    for p, q in zip(pts[:4], pts[4:]):
        assert geodesic(dom, p, q).length == pytest.approx(visibility_oracle(dom, p, q), rel=1e-9)


@pytest.mark.parametrize("name", list(DOMAINS))
def test_symmetry_and_euclidean_lower_bound(name):
    dom = DOMAINS[name]
    pts = sample_inside(dom, 40, seed=7)
    for p, q in zip(pts[:20], pts[20:]):
        a, b = geodesic(dom, p, q).length, geodesic(dom, q, p).length
        assert a == pytest.approx(b, rel=1e-12)
        assert a >= math.hypot(*(p - q)) * (1 - 1e-12)


def test_equality_with_euclidean_on_convex_interior():
    pts = sample_inside(DOMAINS["square"], 40, seed=8)
    for p, q in zip(pts[:20], pts[20:]):
        assert geodesic(DOMAINS["square"], p, q).length == pytest.approx(math.hypot(*(p - q)), rel=1e-12)


@pytest.mark.parametrize("name", list(DOMAINS))
def test_triangle_inequality(name):
    dom = DOMAINS[name]
    pts = sample_inside(dom, 300, seed=9)
    for p, q, r in pts.reshape(100, 3, 2):
        pq = geodesic(dom, p, q).length
        qr = geodesic(dom, q, r).length
        pr = geodesic(dom, p, r).length
        assert pr <= pq + qr + 1e-12


@pytest.mark.parametrize("name", list(DOMAINS))
def test_paths_stay_in_closed_domain(name):
    dom = DOMAINS[name]
    pts = sample_inside(dom, 20, seed=10)
    for p, q in zip(pts[:10], pts[10:]):
        r = geodesic(dom, p, q)
        assert np.array_equal(r.path[0], p) and np.array_equal(r.path[-1], q)
        t = np.linspace(0, 1, 1000)
        seg_len = np.hypot(*np.diff(r.path, axis=0).T)
        cum = np.concatenate([[0], np.cumsum(seg_len)])
        s = t * cum[-1]
        k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(seg_len) - 1)
        frac = np.where(seg_len[k] > 0, (s - cum[k]) / np.where(seg_len[k] > 0, seg_len[k], 1), 0)
        along = r.path[k] + frac[:, None] * (r.path[k + 1] - r.path[k])
        loc = dom.locate_many(along)
        if np.any(loc == Location.OUTSIDE):
            # float rounding of an interpolated point may land a hair outside a boundary edge
            bad = along[loc == Location.OUTSIDE]
            assert dom.index.nearest_many(bad)[0].max() < 1e-12


# --- grid oracle -------------------------------------------------------------------------


def test_grid_square_diagonal():
    g = grid_geodesic(DOMAINS["square"], (0.25, 0.25), (0.75, 0.75), 1 / 256)
    assert g == pytest.approx(math.sqrt(2) / 2, rel=0.08)


def test_grid_exterior_corner():
    g = grid_geodesic(DOMAINS["square-exterior"], (0.5, 1.25), (1.25, 0.5), 1 / 128, window=(-0.5, -0.5, 2, 2))
    assert g == pytest.approx(math.sqrt(5) / 2, rel=0.08)


def test_grid_l_shape_matches_visibility():
    dom = DOMAINS["l-shape"]
    p, q = (1.8, 0.2), (0.2, 1.8)
    g = grid_geodesic(dom, p, q, 1 / 256)
    v = geodesic(dom, p, q).length
    assert abs(g - v) / v <= 0.08 and g >= v * (1 - 1e-3)


def test_grid_comb_exterior_depth_three():
    dom = PolyDomain.exterior_boxed(t1_domain_polygon(3))
    p = (0.7, 0.6)
    target = next((float(x), 0.0) for x, _ in floor_midpoints(3, walled_only=True) if x > 0.6)
    v = geodesic(dom, p, target).length
    g = grid_geodesic(dom, p, target, 2.0**-11, window=(0.6, -0.01, 0.8, 0.65))
    assert abs(g - v) / v <= 0.08


def test_grid_too_coarse_is_reported():
    dom = PolyDomain.interior(john_domain(CuspParams(depth=3, arc_samples=16)))
    with pytest.raises(GridResolutionError):
        # the point sits inside a slit corridor thinner than the cells
        grid_geodesic(dom, (0.999, 0.126), (0.25, 0.5), 0.25)


# --- descent table --------------------------------------------------------------------------


def test_descent_is_nondecreasing_and_grows_with_side_teeth():
    rows = band_descent_cost(4)
    d = [r.D for r in rows]
    assert all(b >= a for a, b in zip(d, d[1:]))
    assert all(r.increment >= 0.1 for r in rows[2:])


def test_descent_control_without_side_teeth_is_flat():
    rows = band_descent_cost(4, CombParams(4, side_teeth=False))
    assert all(abs(r.increment) <= 0.02 for r in rows[3:])
