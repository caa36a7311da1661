import numpy as np
import pytest
from hypothesis import given, strategies as st

from convexo.exceptions import ArgumentError, DimensionError, UnsupportedProjectionError
from convexo.polynomial import Polynomial
from convexo.region import Ball, Box, Polytope, SemialgebraicSet, region_from_json

vec2 = st.lists(st.floats(-5, 5), min_size=2, max_size=2).map(np.array)


def triangle():
    # x >= 0, y >= 0, x + y <= 1
    return Polytope([[-1, 0], [0, -1], [1, 1]], [0, 0, 1])


def test_box_projection_is_clamp():
    B = Box([-1, 0], [1, 2])
    np.testing.assert_array_equal(B.project([3.0, -1.0]), [1.0, 0.0])
    assert B.member([0.5, 1.0]) and not B.member([0.5, 2.1])
    assert B.radius_bound() == pytest.approx(np.sqrt(5))
    assert len(B.vertices()) == 4


def test_ball_projection_radial():
    B = Ball([1.0, 0.0], 2.0)
    np.testing.assert_allclose(B.project([5.0, 0.0]), [3.0, 0.0])
    assert B.radius_bound() == 3.0
    lo, hi = B.clip_line([1.0, 0.0], [0.0, 1.0])
    assert (lo, hi) == pytest.approx((-2.0, 2.0))


def test_polytope_projection_matches_hand_value():
    # (1, 1) projects onto the face x + y = 1 at (1/2, 1/2)
    np.testing.assert_allclose(triangle().project([1.0, 1.0]), [0.5, 0.5], atol=1e-9)
    np.testing.assert_allclose(triangle().project([-1.0, 3.0]), [0.0, 1.0], atol=1e-9)


def test_polytope_vertices_and_box():
    T = triangle()
    v = sorted(map(tuple, np.round(T.vertices(), 12)))
    assert v == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0)]
    lo, hi = T.bounding_box()
    np.testing.assert_allclose(lo, [0, 0], atol=1e-9)
    np.testing.assert_allclose(hi, [1, 1], atol=1e-9)


def test_unbounded_polytope():
    H = Polytope([[0, -1]], [0])  # y >= 0
    assert H.bounding_box() is None and H.radius_bound() is None
    np.testing.assert_allclose(H.project([2.0, -3.0]), [2.0, 0.0])
    with pytest.raises(ArgumentError):
        H.sample(10)
    assert np.all(np.linalg.norm(H.sample(50, radius=3.0), axis=1) <= 3.0)


@given(vec2)
def test_projection_properties(x):
    for R in (Box([-1, -1], [1, 2]), Ball([0.5, 0.0], 1.5), triangle()):
        p = R.project(x)
        assert R.member(p, tol=1e-8)
        # idempotent
        np.testing.assert_allclose(R.project(p), p, atol=1e-8)
        # obtuse-angle property of projections onto convex sets
        for y in R.sample(20, seed=1):
            assert (x - p) @ (y - p) <= 1e-6 * (1 + np.linalg.norm(x - p))


@given(vec2, st.floats(0, 2 * np.pi))
def test_clip_line_endpoints_are_members(a, theta):
    beta = np.array([np.cos(theta), np.sin(theta)])
    for R in (Box([-1, -1], [1, 2]), Ball([0.0, 0.0], 2.0), triangle()):
        iv = R.clip_line(a, beta)
        if iv is not None:
            for t in iv:
                assert R.member(a + t * beta, tol=1e-7)


def test_samples_are_members_and_deterministic():
    T = triangle()
    s1, s2 = T.sample(100, seed=3), T.sample(100, seed=3)
    np.testing.assert_array_equal(s1, s2)
    assert len(s1) == 100 and T.member_many(s1).all()


def test_semialgebraic_disc():
    x, y = Polynomial.variables(2)
    S = SemialgebraicSet(geq=[1 - x**2 - y**2], bounded=True)
    assert S.member([0.5, 0.5]) and not S.member([1.0, 1.0])
    assert not S.supports_projection()
    with pytest.raises(UnsupportedProjectionError):
        S.project([2.0, 0.0])
    # integer description gives a (huge but finite) radius bound
    assert S.radius_bound() >= 1.0
    assert S.check_midpoint_convexity(chords=200)


def test_semialgebraic_radius_hint_and_oracle():
    x, y = Polynomial.variables(2)
    S = SemialgebraicSet(geq=[1 - x**2 - y**2], radius_hint=1.0,
                         projector=lambda p: p / max(1.0, np.linalg.norm(p)))
    assert S.radius_bound() == 1.0
    np.testing.assert_allclose(S.project([3.0, 4.0]), [0.6, 0.8])


def test_region_json_roundtrip():
    for R in (Box([0, 0], [1, 2]), Ball([0, 1], 3.0), triangle()):
        R2 = region_from_json(R.to_json(), 2)
        pts = np.array([[0.2, 0.3], [5.0, 5.0], [0.5, 1.5]])
        np.testing.assert_array_equal(R.member_many(pts), R2.member_many(pts))
    with pytest.raises(ArgumentError):
        region_from_json({"type": "torus"})


def test_dimension_checks():
    with pytest.raises(DimensionError):
        Box([0, 0], [1, 1]).member([0.0, 0.0, 0.0])
