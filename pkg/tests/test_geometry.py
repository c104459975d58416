import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tableplan.geometry import (SAT_EPS, Footprint, Pose, Workspace, collide,
                                collision_probability, convex_polygons_collide,
                                in_workspace, minkowski_area, normalize_angle,
                                transform)

from oracles import (clip_intersection_area, mc_minkowski_area,
                     random_convex_polygon, sampling_overlap)

UNIT_SQUARE = Footprint.rectangle(1.0, 1.0)
WS10 = Workspace(10.0, 10.0)


def vertex_set_close(polys, expected, tol=1e-9):
    polys = sorted(polys)
    expected = sorted(expected)
    return all(abs(a - c) <= tol and abs(b - d) <= tol
               for (a, b), (c, d) in zip(polys, expected))


# ---------------------------------------------------------------------------
# poses and footprints
# ---------------------------------------------------------------------------


@given(st.floats(min_value=-1000.0, max_value=1000.0, allow_nan=False))
def test_pose_theta_normalized(theta):
    p = Pose(0.0, 0.0, theta)
    assert 0.0 <= p.theta < 2.0 * math.pi


def test_normalize_angle_edges():
    assert normalize_angle(2.0 * math.pi) == 0.0
    assert normalize_angle(-1e-18) in (0.0, pytest.approx(2.0 * math.pi, abs=1e-12))
    assert 0.0 <= normalize_angle(-1e-18) < 2.0 * math.pi


def test_rectangle_footprint_derived_values():
    fp = Footprint.rectangle(2.0, 1.0)
    assert fp.area == pytest.approx(2.0)
    assert fp.perimeter == pytest.approx(6.0)
    assert fp.bounding_radius == pytest.approx(math.hypot(2.0, 1.0) / 2.0)


def test_ellipse_footprint_exact_cache_and_approximation():
    fp = Footprint.ellipse(2.0, 1.0)
    assert fp.area == pytest.approx(2.0 * math.pi)
    # oracle: numeric quadrature of the ellipse arc length
    t = np.linspace(0.0, 2.0 * math.pi, 200001)
    arc = np.trapezoid(np.hypot(2.0 * np.sin(t), 1.0 * np.cos(t)), t)
    assert fp.perimeter == pytest.approx(arc, rel=1e-6)
    assert len(fp.base_vertices) == 16
    # inscribed approximation never exceeds the exact bounding radius
    assert all(math.hypot(x / 2.0, y) <= 1.0 + 1e-12 for x, y in fp.base_vertices)


def test_disc_footprint():
    fp = Footprint.disc(1.5)
    assert fp.area == pytest.approx(math.pi * 2.25)
    assert fp.perimeter == pytest.approx(3.0 * math.pi)
    assert fp.bounding_radius == 1.5
    assert len(fp.base_vertices) == 16


def test_polygon_footprint_validation():
    tri = Footprint.polygon([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)])
    assert tri.area == pytest.approx(0.5)
    with pytest.raises(ValueError):
        Footprint.polygon([(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)])  # clockwise
    with pytest.raises(ValueError):
        Footprint.polygon([(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (0.0, 1.0)])  # collinear
    with pytest.raises(ValueError):
        Footprint.rectangle(0.0, 1.0)


def test_polygon_bounding_radius_covers_vertices():
    rng = np.random.default_rng(5)
    for _ in range(20):
        fp = Footprint.polygon(random_convex_polygon(rng, 9, 2.0))
        assert fp.bounding_radius >= max(math.hypot(x, y) for x, y in fp.base_vertices) - 1e-12


# ---------------------------------------------------------------------------
# transform
# ---------------------------------------------------------------------------


def test_transform_identity_unit_square():
    verts = transform(UNIT_SQUARE, Pose(0.0, 0.0, 0.0))
    assert vertex_set_close(verts, [(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)])


def test_transform_square_quarter_turn_symmetry():
    verts = transform(UNIT_SQUARE, Pose(0.0, 0.0, math.pi / 2.0))
    assert vertex_set_close(verts, [(0.5, 0.5), (-0.5, 0.5), (-0.5, -0.5), (0.5, -0.5)])


def test_transform_rotated_rectangle():
    # hand evaluation of the rotation matrix: a 2x1 rectangle turned a quarter
    # turn becomes an axis-swapped rectangle centered at (3, 4)
    verts = transform(Footprint.rectangle(2.0, 1.0), Pose(3.0, 4.0, math.pi / 2.0))
    assert vertex_set_close(verts, [(2.5, 3.0), (3.5, 3.0), (3.5, 5.0), (2.5, 5.0)])


def test_transform_preserves_vertex_order():
    fp = Footprint.polygon([(1.0, 0.0), (0.0, 1.0), (-1.0, -0.5)])
    verts = transform(fp, Pose(2.0, 1.0, 0.7))
    c, s = math.cos(0.7), math.sin(0.7)
    for (vx, vy), (wx, wy) in zip(fp.base_vertices, verts):
        assert wx == pytest.approx(2.0 + c * vx - s * vy)
        assert wy == pytest.approx(1.0 + s * vx + c * vy)


# ---------------------------------------------------------------------------
# collision checking
# ---------------------------------------------------------------------------


def test_collide_broad_phase_disjoint():
    assert not collide(UNIT_SQUARE, Pose(0.0, 0.0), UNIT_SQUARE, Pose(3.0, 0.0))


def test_collide_identical_pose():
    assert collide(UNIT_SQUARE, Pose(2.0, 2.0, 0.3), UNIT_SQUARE, Pose(2.0, 2.0, 0.3))


def test_collide_corner_overlap_matches_sampling_oracle():
    a = transform(UNIT_SQUARE, Pose(0.0, 0.0))
    b = transform(UNIT_SQUARE, Pose(0.9, 0.9))
    rng = np.random.default_rng(0)
    assert sampling_overlap(a, b, rng, samples=4000) is True
    assert collide(UNIT_SQUARE, Pose(0.0, 0.0), UNIT_SQUARE, Pose(0.9, 0.9))


def test_touching_boundaries_do_not_collide():
    # abutting squares share an edge: zero-area intersection
    assert not collide(UNIT_SQUARE, Pose(0.0, 0.0), UNIT_SQUARE, Pose(1.0, 0.0))
    assert not collide(UNIT_SQUARE, Pose(0.0, 0.0), UNIT_SQUARE, Pose(1.0, 1.0))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=10 ** 6))
def test_collide_symmetric(seed):
    rng = np.random.default_rng(seed)
    fa = Footprint.rectangle(rng.uniform(0.3, 2.0), rng.uniform(0.3, 2.0))
    fb = Footprint.ellipse(rng.uniform(0.3, 2.0), rng.uniform(0.3, 1.0))
    pa = Pose(rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 7))
    pb = Pose(rng.uniform(0, 3), rng.uniform(0, 3), rng.uniform(0, 7))
    assert collide(fa, pa, fb, pb) == collide(fb, pb, fa, pa)


def test_broad_phase_soundness():
    # whenever bounding discs are disjoint, SAT must agree there is no overlap
    rng = np.random.default_rng(42)
    checked = 0
    for _ in range(10_000):
        fa = Footprint.rectangle(rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5))
        fb = Footprint.rectangle(rng.uniform(0.2, 1.5), rng.uniform(0.2, 1.5))
        pa = Pose(rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0, 7))
        pb = Pose(rng.uniform(0, 6), rng.uniform(0, 6), rng.uniform(0, 7))
        d = math.hypot(pa.x - pb.x, pa.y - pb.y)
        if d > fa.bounding_radius + fb.bounding_radius:
            checked += 1
            assert not convex_polygons_collide(transform(fa, pa), transform(fb, pb))
    assert checked > 1000


def test_narrow_phase_matches_clipping_oracle():
    # disagreements are only allowed within the tangency band around zero
    # intersection area (SAT uses a 1e-9 projection tolerance)
    rng = np.random.default_rng(7)
    tangency_area = 1e-8
    disagreements = 0
    for _ in range(1000):
        pa = random_convex_polygon(rng, 8, 1.0,
                                   center=(rng.uniform(0, 3), rng.uniform(0, 3)))
        pb = random_convex_polygon(rng, 8, 1.0,
                                   center=(rng.uniform(0, 3), rng.uniform(0, 3)))
        area = clip_intersection_area(pa, pb)
        verdict = convex_polygons_collide(pa, pb)
        if verdict != (area > tangency_area):
            assert area <= tangency_area, f"SAT missed overlap of area {area}"
            disagreements += 1
    assert disagreements <= 5


# ---------------------------------------------------------------------------
# workspace containment
# ---------------------------------------------------------------------------


def test_in_workspace_examples():
    assert in_workspace(UNIT_SQUARE, Pose(5.0, 5.0), WS10)
    assert not in_workspace(UNIT_SQUARE, Pose(0.2, 5.0), WS10)  # crosses x = 0


def test_in_workspace_bounding_radius_containment():
    rng = np.random.default_rng(3)
    for _ in range(50):
        fp = Footprint.ellipse(rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0))
        assert in_workspace(fp, Pose(5.0, 5.0, rng.uniform(0, 7)), WS10)


def test_in_workspace_boundary_touch_allowed():
    assert in_workspace(UNIT_SQUARE, Pose(0.5, 0.5, 0.0), WS10)


def test_workspace_validation():
    with pytest.raises(ValueError):
        Workspace(0.0, 5.0)


# ---------------------------------------------------------------------------
# disc-offset area and collision probability
# ---------------------------------------------------------------------------


def test_minkowski_area_degenerate_disc():
    assert minkowski_area(UNIT_SQUARE, 0.0) == pytest.approx(1.0)


def test_minkowski_area_hand_values():
    assert minkowski_area(Footprint.rectangle(2.0, 1.0), 0.5) == pytest.approx(
        2.0 + 0.25 * math.pi + 3.0)
    assert minkowski_area(UNIT_SQUARE, 1.0) == pytest.approx(1.0 + math.pi + 4.0)


def test_minkowski_area_rejects_negative_radius():
    with pytest.raises(ValueError):
        minkowski_area(UNIT_SQUARE, -0.1)


def test_minkowski_area_matches_monte_carlo():
    rng = np.random.default_rng(2024)
    for k in range(20):
        poly = random_convex_polygon(rng, 8, 1.2)
        fp = Footprint.polygon(poly)
        for r in (0.1, 0.5, 1.0):
            est = mc_minkowski_area(poly, r, rng, 400_000)
            assert minkowski_area(fp, r) == pytest.approx(est, rel=5e-3)


def test_collision_probability_hand_value():
    p = collision_probability(UNIT_SQUARE, 1.0, WS10)
    assert p == pytest.approx((1.0 + math.pi + 4.0) / 64.0)


def test_collision_probability_zero_radius():
    fp = Footprint.rectangle(2.0, 1.5)
    assert collision_probability(fp, 0.0, WS10) == pytest.approx(fp.area / 100.0)


def test_collision_probability_monotone_in_size():
    small = collision_probability(Footprint.rectangle(1.0, 1.0), 0.5, WS10)
    large = collision_probability(Footprint.rectangle(2.0, 2.0), 0.5, WS10)
    assert large > small


def test_collision_probability_domain_error():
    with pytest.raises(ValueError):
        collision_probability(UNIT_SQUARE, 5.0, WS10)


def test_collision_probability_clamped():
    assert collision_probability(Footprint.rectangle(9.0, 9.0), 0.5, WS10) == 1.0


def test_collision_probability_upper_bounds_empirical_frequency():
    # place the polygon at least 2r from the boundary and drop discs uniformly;
    # the empirical hit rate must stay below the formula plus 2 sigma
    rng = np.random.default_rng(11)
    r = 0.6
    fp = Footprint.rectangle(1.4, 0.9)
    prob = collision_probability(fp, r, WS10)
    hits = 0
    trials = 200_000
    margin = 2.0 * r + fp.bounding_radius
    for _ in range(40):
        pose = Pose(rng.uniform(margin, 10 - margin), rng.uniform(margin, 10 - margin),
                    rng.uniform(0, 2 * math.pi))
        poly = np.asarray(transform(fp, pose))
        centers = rng.uniform(r, 10.0 - r, size=(trials // 40, 2))
        inside = np.ones(len(centers), dtype=bool)
        dist2 = np.full(len(centers), np.inf)
        k = len(poly)
        for i in range(k):
            a = poly[i]
            e = poly[(i + 1) % k] - a
            rel = centers - a
            cross = e[0] * rel[:, 1] - e[1] * rel[:, 0]
            inside &= cross >= 0
            t = np.clip(rel @ e / (e @ e), 0.0, 1.0)
            proj = rel - t[:, None] * e
            dist2 = np.minimum(dist2, (proj ** 2).sum(axis=1))
        hits += int((inside | (dist2 <= r * r)).sum())
    freq = hits / trials
    sigma = math.sqrt(prob * (1 - prob) / trials)
    assert freq <= prob + 2.0 * sigma
