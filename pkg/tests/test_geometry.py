import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from avgdist.geometry import (
    Degenerate,
    EmptyOrUnbounded,
    NotConvex,
    OutsidePolygon,
    boundary_distance,
    erode,
    erosion_profile,
    from_support_samples,
    hausdorff_distance,
    intersection_area,
    make_polygon,
    measures,
    point_boundary_distance,
    random_convex_polygon,
    regular_polygon,
    shape_metrics,
    sym_diff_area,
)

SQUARE = [(0, 0), (1, 0), (1, 1), (0, 1)]
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def unit_square():
    return make_polygon(SQUARE)


def dense_boundary(P, per_edge=None, spacing=None):
    """Boundary samples, either ``per_edge`` per edge or at a fixed ``spacing``."""
    out = []
    for i in range(P.n):
        m = per_edge or int(math.ceil(P.edge_lengths[i] / spacing))
        s = np.linspace(0.0, 1.0, m, endpoint=False)[:, None]
        out.append(P.vertices[i] + s * P.edges[i])
    return np.vstack(out)


def random_rigid(rng):
    c, s = math.cos(a := rng.uniform(0, 2 * math.pi)), math.sin(a)
    return np.array([[c, -s], [s, c]]), rng.normal(size=2) * 3


# --- construction and measures ------------------------------------------------

def test_clockwise_square_is_reoriented():
    P = make_polygon(SQUARE[::-1])
    assert P.n == 4
    assert P.area == pytest.approx(1.0)
    assert set(map(tuple, P.vertices)) == set(map(tuple, np.array(SQUARE, float)))


def test_collinear_point_is_elided():
    P = make_polygon([(0, 0), (1, 0), (2, 0), (1, 1)])
    assert P.n == 3
    assert sorted(map(tuple, P.vertices)) == [(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]


def test_near_duplicate_vertices_merge():
    P = make_polygon([(0, 0), (1, 0), (1, 1e-14), (0, 1)])
    assert P.n == 3


def test_reflex_and_degenerate_inputs_raise():
    with pytest.raises(NotConvex):
        make_polygon([(0, 0), (2, 0), (1, 0.5), (2, 2), (0, 2)])
    with pytest.raises(Degenerate):
        make_polygon([(0, 0), (1, 1), (2, 2)])
    with pytest.raises(Degenerate):
        make_polygon([(0, 0), (1, 1)])


def test_measures_examples():
    area, per, diam, cen = measures(unit_square())
    assert (area, per) == pytest.approx((1.0, 4.0))
    assert diam == pytest.approx(math.sqrt(2))
    assert cen == pytest.approx([0.5, 0.5])
    area, per, diam, cen = measures(make_polygon([(0, 0), (1, 0), (0, 1)]))
    assert (area, per, diam) == pytest.approx((0.5, 2 + math.sqrt(2), math.sqrt(2)))
    assert cen == pytest.approx([1 / 3, 1 / 3])
    area, per, _, _ = measures(regular_polygon(6))
    assert area == pytest.approx(3 * math.sqrt(3) / 2)
    assert per == pytest.approx(6.0)


def test_regular_polygon_area_formula():
    for n in (3, 7, 64):
        P = regular_polygon(n, 2.0)
        assert P.area == pytest.approx(0.5 * n * 4.0 * math.sin(2 * math.pi / n), rel=1e-13)


# --- boundary distance --------------------------------------------------------

def test_boundary_distance_examples():
    P = unit_square()
    assert boundary_distance(P, (0.5, 0.5)) == pytest.approx(0.5)
    assert boundary_distance(P, (0.25, 0.5)) == pytest.approx(0.25)
    Q = random_convex_polygon(9, 3)
    for v in Q.vertices:
        assert boundary_distance(Q, v) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(OutsidePolygon):
        boundary_distance(P, (1.5, 0.5))


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_boundary_distance_matches_dense_sampling(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_polygon(int(rng.integers(3, 15)), rng)
    # sample spacing delta gives oracle error <= delta^2 / (8 d) at depth d
    B = dense_boundary(P, spacing=1e-4 * P.diameter)
    w = rng.dirichlet(np.ones(P.n), size=20)
    checked = 0
    for x in w @ P.vertices:
        brute = np.min(np.hypot(*(B - x).T))
        if brute < 0.01 * P.diameter:
            continue
        checked += 1
        assert abs(boundary_distance(P, x) - brute) <= 1e-6 * P.diameter
    assert checked > 0 or P.width < 0.05 * P.diameter


def test_point_boundary_distance_outside_points():
    P = unit_square()
    d = point_boundary_distance(P, np.array([[2.0, 0.5], [2.0, 2.0], [0.5, 0.5]]))
    assert d == pytest.approx([1.0, math.sqrt(2), 0.5])


# --- erosion --------------------------------------------------------------------

def test_square_profile_is_single_piece():
    prof = erosion_profile(unit_square())
    assert prof.inradius == pytest.approx(0.5)
    assert len(prof.pieces) == 1
    assert prof.pieces[0] == pytest.approx((1.0, -4.0, 4.0))


def test_equilateral_triangle_profile():
    T = make_polygon([(0, 0), (1, 0), (0.5, math.sqrt(3) / 2)])
    prof = erosion_profile(T)
    r = 1 / (2 * math.sqrt(3))
    assert prof.inradius == pytest.approx(r, rel=1e-13)
    for t in np.linspace(0, r, 7):
        assert prof.area(t) == pytest.approx(math.sqrt(3) / 4 * (1 - 2 * math.sqrt(3) * t) ** 2, abs=1e-15)


def test_rectangle_profile():
    prof = erosion_profile(make_polygon([(0, 0), (2, 0), (2, 1), (0, 1)]))
    assert prof.inradius == pytest.approx(0.5)
    for t in np.linspace(0, 0.5, 11):
        assert prof.area(t) == pytest.approx((2 - 2 * t) * (1 - 2 * t), abs=1e-15)


def test_erode_examples():
    P = unit_square()
    assert erode(P, 0) is P
    Q = erode(P, 0.25)
    assert Q.area == pytest.approx(0.25)
    assert sorted(map(tuple, np.round(Q.vertices, 12))) == [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]
    assert erode(P, 0.6) is None
    assert erode(P, 0.5) is None


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_profile_matches_erode_and_is_monotone_convex(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_polygon(int(rng.integers(3, 30)), rng, stretch=rng.uniform(1, 10))
    prof = erosion_profile(P)
    assert prof.area(0.0) == pytest.approx(P.area, rel=1e-12)
    assert abs(prof.area(prof.inradius)) <= 1e-9 * P.area
    for t in rng.uniform(0, prof.inradius, 100):
        E = erode(P, t, prof)
        got = 0.0 if E is None else E.area
        assert abs(got - prof.area(t)) <= 1e-9 * P.area
        if E is not None:
            assert abs(E.perimeter - prof.perimeter(t)) <= 1e-9 * P.perimeter
    # continuity, monotonicity and convexity on a fine grid
    ts = np.linspace(0, prof.inradius, 2001)
    A = np.array([prof.area(t) for t in ts])
    assert np.all(np.diff(A) <= 1e-12 * P.area)
    assert np.all(np.diff(A, 2) >= -1e-10 * P.area)
    bp = prof.breakpoints
    for k in range(1, len(bp) - 1):
        left = np.polyval(prof.pieces[k - 1][::-1], bp[k])
        right = np.polyval(prof.pieces[k][::-1], bp[k])
        assert left == pytest.approx(right, abs=1e-12 * P.area)
    assert all(c >= 0 for _, _, c in prof.pieces)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_erosion_semigroup(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_polygon(int(rng.integers(3, 20)), rng)
    r = erosion_profile(P).inradius
    s, t = rng.uniform(0, 0.45 * r, 2)
    A = erode(erode(P, s), t)
    B = erode(P, s + t)
    assert hausdorff_distance(A, B) <= 1e-9 * P.diameter


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_inradius_matches_linear_program(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_polygon(int(rng.integers(3, 25)), rng, stretch=rng.uniform(1, 20))
    # maximise r subject to n_i . c + r <= h_i
    A = np.column_stack([P.normals, np.ones(P.n)])
    res = linprog([0, 0, -1], A_ub=A, b_ub=P.offsets, bounds=[(None, None)] * 3)
    assert erosion_profile(P).inradius == pytest.approx(-res.fun, rel=1e-9)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_rigid_motion_invariance(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_polygon(int(rng.integers(3, 20)), rng)
    R, b = random_rigid(rng)
    Q = make_polygon(P.vertices @ R.T + b)
    assert Q.area == pytest.approx(P.area, rel=1e-9)
    assert Q.perimeter == pytest.approx(P.perimeter, rel=1e-9)
    pp, pq = erosion_profile(P), erosion_profile(Q)
    assert pq.inradius == pytest.approx(pp.inradius, rel=1e-9)
    for t in np.linspace(0, pp.inradius, 9):
        assert pq.area(t) == pytest.approx(pp.area(t), rel=1e-9, abs=1e-12 * P.area)
    x = rng.dirichlet(np.ones(P.n)) @ P.vertices
    assert boundary_distance(Q, R @ x + b) == pytest.approx(boundary_distance(P, x), rel=1e-9)


# --- metrics --------------------------------------------------------------------

def test_sym_diff_examples():
    P = unit_square()
    assert sym_diff_area(P, P) == pytest.approx(0.0, abs=1e-15)
    assert sym_diff_area(P, P.translated((0.5, 0))) == pytest.approx(1.0)
    assert sym_diff_area(P, P.translated((3, 0))) == pytest.approx(2.0)


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_sym_diff_is_a_metric(seed):
    rng = np.random.default_rng(seed)
    P, Q, R = (random_convex_polygon(int(rng.integers(3, 12)), rng) for _ in range(3))
    assert sym_diff_area(P, Q) == sym_diff_area(Q, P)
    assert sym_diff_area(P, R) <= sym_diff_area(P, Q) + sym_diff_area(Q, R) + 1e-9
    assert sym_diff_area(P, P) <= 1e-12 * P.area
    assert sym_diff_area(P, P.translated((1e-3, 0))) > 0


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_intersection_area_against_shapely(seed):
    shapely = pytest.importorskip("shapely.geometry")
    rng = np.random.default_rng(seed)
    P, Q = (random_convex_polygon(int(rng.integers(3, 12)), rng) for _ in range(2))
    Q = Q.translated(rng.normal(size=2) * 0.5)
    ref = shapely.Polygon(P.vertices).intersection(shapely.Polygon(Q.vertices)).area
    assert intersection_area(P, Q) == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_hausdorff_examples():
    P = unit_square()
    assert hausdorff_distance(P, P) == pytest.approx(0.0, abs=1e-15)
    assert hausdorff_distance(P, erode(P, 0.1)) == pytest.approx(0.1 * math.sqrt(2))
    for a in (1e-3, 0.03, 0.2):
        assert hausdorff_distance(P, P.translated((a, 0))) == pytest.approx(a)
    rep = shape_metrics(P, P.translated((0.5, 0)))
    assert (rep.sym_diff_area, rep.hausdorff) == pytest.approx((1.0, 0.5))


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_hausdorff_matches_dense_sampling(seed):
    rng = np.random.default_rng(seed)
    P = random_convex_polygon(int(rng.integers(3, 10)), rng)
    Q = random_convex_polygon(int(rng.integers(3, 10)), rng).translated(rng.normal(size=2) * 0.3)
    BP, BQ = dense_boundary(P, 1500), dense_boundary(Q, 1500)
    brute = max(point_boundary_distance(Q, BP).max(), point_boundary_distance(P, BQ).max())
    got = hausdorff_distance(P, Q)
    assert got >= brute - 1e-12
    assert got <= brute + 2e-3 * max(P.diameter, Q.diameter)


# --- support functions -----------------------------------------------------------

def test_four_direction_support_gives_square():
    Q = from_support_samples([1, 1, 1, 1])
    assert Q.area == pytest.approx(4.0)
    assert np.abs(Q.vertices).max() == pytest.approx(1.0)


def test_unit_support_gives_regular_polygon():
    Q = from_support_samples(np.ones(64))
    assert Q.n == 64
    assert Q.area == pytest.approx(64 * math.tan(math.pi / 64))
    assert abs(Q.area / math.pi - 1) < 2e-3


def test_redundant_half_plane_is_dropped():
    ang = 2 * np.pi * np.arange(8) / 8
    h = np.ones(8)
    base = from_support_samples(h[::2], ang[::2])
    h[1::2] = math.sqrt(2)  # diagonals touching the square's corners
    h[1] = 10.0
    Q = from_support_samples(h, ang)
    assert Q.n == 4
    assert sym_diff_area(Q, base) == pytest.approx(0.0, abs=1e-12)


def test_empty_or_unbounded_support_raises():
    with pytest.raises(EmptyOrUnbounded):
        from_support_samples([1, 1, 1], [0.0, 0.1, 0.2])
    with pytest.raises(EmptyOrUnbounded):
        from_support_samples([1.0, -3.0, 1.0, -3.0])


@pytest.mark.parametrize("seed", range(10))
def test_support_reconstruction_contains_and_converges(seed):
    P = random_convex_polygon(10, seed).translated((0.1, -0.2))
    errs = []
    for N in (16, 64, 256):
        ang = 2 * np.pi * np.arange(N) / N
        Q = from_support_samples(P.support(ang), ang)
        assert intersection_area(P, Q) == pytest.approx(P.area, rel=1e-9)
        errs.append(sym_diff_area(P, Q))
    assert errs[0] > errs[1] > errs[2]


# --- random polygons -------------------------------------------------------------

def test_random_polygon_determinism_and_triangles():
    A, B = random_convex_polygon(12, 42), random_convex_polygon(12, 42)
    assert np.array_equal(A.vertices, B.vertices)
    assert random_convex_polygon(3, 1).n == 3


def test_random_polygons_always_validate():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        P = random_convex_polygon(int(rng.integers(3, 30)), rng, stretch=rng.uniform(1, 50))
        Q = make_polygon(P.vertices)
        assert Q.n == P.n
        assert P.diameter / P.width <= 100.0
