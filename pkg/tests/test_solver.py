import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from convexo.certificates import Family
from convexo.convexifier import ConvexifierSpec
from convexo.exceptions import ArgumentError, DomainError, UnsupportedProjectionError
from convexo.polynomial import Polynomial
from convexo.region import Ball, Box, Polytope, SemialgebraicSet
from convexo.solver import argmin, grid_oracle, grid_step
from convexo.verifier import practical_n

(T,) = Polynomial.variables(1)
X, Y = Polynomial.variables(2)
TRI = Polytope([[-1, 0], [0, -1], [1, 1]], [0, 0, 1])


def spec(family, N, xi, f):
    return ConvexifierSpec(Family(family), N, np.asarray(xi, dtype=float), f)


def test_boundary_minimizer_on_interval():
    # centered at the right end the derivative there is -2 e^0 < 0, so the argmin is x = 1
    f = (T - 2) ** 2 + 1
    N = practical_n("single", f, Box([0], [1]), xi_radius=1.0, budget=300, n_local=3).N
    res = argmin(spec("single", N, [1.0], f), Box([0], [1]))
    assert res.converged and res.minimizer[0] == pytest.approx(1.0, abs=1e-6)


def test_interior_minimizer_solves_first_order_condition():
    # centered at 0 the minimizer solves N x f + (x - 2) = 0 inside (0, 1)
    f = (T - 2) ** 2 + 1
    N = 2.0
    x = argmin(spec("single", N, [0.0], f), Box([0], [1])).minimizer[0]
    assert 0 < x < 1
    assert N * x * f.evaluate([x]) + (x - 2) == pytest.approx(0.0, abs=1e-6)


def test_symmetric_center_is_minimizer():
    res = argmin(spec("single", 1.0, [0, 0], X**2 + Y**2 + 1), Ball([0, 0], 1.0), x0=[0.5, -0.3])
    np.testing.assert_allclose(res.minimizer, [0, 0], atol=1e-8)


@pytest.mark.parametrize("family", list(Family))
def test_constant_polynomial_minimizer_is_center(family):
    one = Polynomial.constant(1.0, 2)
    res = argmin(spec(family, 1.5, [0.3, 0.6], one), Box([0, 0], [1, 1]), x0=[1, 0])
    np.testing.assert_allclose(res.minimizer, [0.3, 0.6], atol=1e-7)
    np.testing.assert_allclose(grid_oracle(spec(family, 1.5, [0.3, 0.6], one), Box([0, 0], [1, 1]), 11), [0.3, 0.6])


def test_grid_oracle_refinement_consistency():
    s = spec("single", 2.0, [0.3, 0.2], (X - 0.75) ** 2 + 3 * (Y - 0.25) ** 2 + X * Y + 1)
    B = Box([0, 0], [1, 1])
    coarse = grid_oracle(s, B, 21)
    fine = grid_oracle(s, B, 41)
    assert np.max(np.abs(coarse - fine)) <= grid_step(B, 21) + 1e-12


def test_descent_is_monotone_and_feasible():
    s = spec("double-outer", 1.0, [0.2, 0.1], X**4 + Y**2 - X * Y + 1)
    vals = []
    for k in range(0, 12):
        r = argmin(s, TRI, max_iter=k, x0=[1.0, 0.0])
        assert TRI.member(r.minimizer, tol=1e-8)
        vals.append(r.log_value_at_min)
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_domain_error_on_nonpositive_polynomial():
    with pytest.raises(DomainError):
        argmin(spec("single", 1.0, [0, 0], X**2 + Y**2 - 0.25), Box([-1, -1], [1, 1]))


def test_requires_projection_and_valid_tolerance():
    disc = SemialgebraicSet(geq=[1 - X**2 - Y**2], bounded=True)
    s = spec("single", 1.0, [0, 0], X**2 + Y**2 + 1)
    with pytest.raises(UnsupportedProjectionError):
        argmin(s, disc)
    with pytest.raises(ArgumentError):
        argmin(s, Box([-1, -1], [1, 1]), tol=0.0)


def test_grid_oracle_rejects_bad_input():
    s = spec("single", 1.0, [0, 0], X**2 + Y**2 + 1)
    with pytest.raises(ArgumentError):
        grid_oracle(s, Polytope([[0, -1]], [0]))


def test_unbounded_region():
    plane = Polytope(np.zeros((0, 2)), np.zeros(0), num_vars=2)
    res = argmin(spec("single", 1.0, [3.0, -2.0], X**2 + Y**2 + 1), plane)
    # stationarity of N|x - xi|^2 + ln(|x|^2 + 1) along the ray through xi
    r = np.linalg.norm(res.minimizer)
    assert res.converged and (r - np.sqrt(13)) + r / (r * r + 1) == pytest.approx(0.0, abs=1e-7)


@settings(max_examples=20)
@given(st.integers(0, 10**6))
def test_agrees_with_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 3))
    A = rng.normal(size=(n, n))
    Q = A @ A.T + np.eye(n)
    c = rng.uniform(-1, 1, n)
    xs = Polynomial.variables(n)
    f = Polynomial.constant(1.0, n)
    for i in range(n):
        for j in range(n):
            f = f + Q[i, j] * (xs[i] - c[i]) * (xs[j] - c[j])
    region = Box(-np.ones(n), np.ones(n)) if rng.uniform() < 0.5 else Ball(np.zeros(n), 1.0)
    s = spec(rng.choice(["single", "double-outer", "double-inner"]), float(rng.uniform(0.5, 3)),
             rng.uniform(-0.5, 0.5, n), f)
    res = argmin(s, region)
    resolution = 201 if n == 1 else 61
    oracle = grid_oracle(s, region, resolution)
    assert np.max(np.abs(res.minimizer - oracle)) <= 2 * grid_step(region, resolution)
