import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from convexo.certificates import Family
from convexo.convexifier import (ConvexifierSpec, bracket_double_exp, bracket_theta, discriminant_g,
                                 discriminant_g_many)
from convexo.exceptions import ArgumentError, DimensionError, DomainError
from convexo.polynomial import Polynomial
from convexo.verifier import double_exp_counterexample, single_exp_counterexample

(T,) = Polynomial.variables(1)
X, Y = Polynomial.variables(2)
# positive everywhere, with nonconvex level sets
POS2 = 1 + (X - Y) ** 2 + X**2 * Y**2 - 0.5 * X + 0.3 * Y**3 * X


def spec(family, N, xi, f):
    return ConvexifierSpec(Family(family), N, np.atleast_1d(np.asarray(xi, dtype=float)), f)


def test_log_value_fixtures():
    assert spec("single", 1.0, [0, 0], Polynomial.constant(1.0, 2)).log_value([2.0, 0.0]) == pytest.approx(4.0)
    f = T**2 + 1
    assert spec("single", 1.0, 0, f).log_value([1.0]) == pytest.approx(1 + math.log(2), rel=1e-14)
    assert spec("double-outer", 1.0, 0, f).log_value([1.0]) == pytest.approx(math.e + math.log(2), rel=1e-14)
    # inner: N e^{|x|^2} + ln f
    assert spec("double-inner", 2.0, 0, f).log_value([1.0]) == pytest.approx(2 * math.e + math.log(2), rel=1e-14)


def test_log_gradient_fixtures():
    f = T**2 + 1
    np.testing.assert_allclose(spec("single", 1.0, 0, f).log_gradient([1.0]), [3.0])
    for fam in Family:
        np.testing.assert_array_equal(spec(fam, 3.0, [0, 0], X**2 + Y**2 + 1).log_gradient([0.0, 0.0]), [0, 0])


@given(st.sampled_from(list(Family)), st.floats(0.1, 3),
       st.lists(st.floats(-0.8, 0.8), min_size=2, max_size=2), st.lists(st.floats(-0.8, 0.8), min_size=2, max_size=2))
def test_log_gradient_matches_finite_differences(fam, N, x, xi):
    s = spec(fam, N, xi, POS2)
    x = np.array(x)
    h = 1e-6
    fd = [(s.log_value(x + h * e) - s.log_value(x - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(s.log_gradient(x), fd, rtol=1e-5, atol=1e-5)


def test_log_value_many_matches_scalar():
    s = spec("double-outer", 2.0, [0.1, -0.2], POS2)
    pts = np.random.default_rng(0).uniform(-1, 1, size=(20, 2))
    np.testing.assert_allclose(s.log_value_many(pts), [s.log_value(p) for p in pts], rtol=1e-14)


def test_domain_error_carries_point():
    s = spec("single", 1.0, [0, 0], X**2 + Y**2 - 1)
    with pytest.raises(DomainError) as exc:
        s.log_value([0.0, 0.0])
    np.testing.assert_array_equal(exc.value.point, [0.0, 0.0])


def test_spec_validation():
    with pytest.raises(ArgumentError):
        spec("single", 0.0, [0, 0], POS2)
    with pytest.raises(DimensionError):
        spec("single", 1.0, [0, 0, 0], POS2)
    with pytest.raises(ValueError):
        spec("triple", 1.0, [0, 0], POS2)


def test_value_overflows_to_inf_while_log_stays_finite():
    s = spec("double-outer", 10.0, [0, 0], POS2)
    assert s.value([3.0, 3.0]) == math.inf
    # e^{180} + ln f: huge but finite in log space
    assert s.log_value([3.0, 3.0]) == pytest.approx(math.exp(180.0), rel=1e-12)


def test_bracket_fixtures():
    f = T**2 + 1
    assert bracket_theta(f, 1.0, [0.0], [0.0], [1.0]) == pytest.approx(4.0)
    assert discriminant_g(f, 1.0, [0.0], [1.0]) == pytest.approx(4.0)
    assert discriminant_g(Polynomial.constant(3.0, 2), 2.0, [0.4, 1.0], [0.6, 0.8]) == pytest.approx(36.0)
    # along the chord (x, 1/10, -10) the minimum is negative, near x = 0.79
    f = single_exp_counterexample()
    xs = np.linspace(-1, 1, 401)
    P = np.c_[xs, np.full_like(xs, 0.1), np.full_like(xs, -10.0)]
    g = discriminant_g_many(f, 10.0, P, np.tile([1.0, 0.0, 0.0], (len(xs), 1)))
    assert g.min() < 0 and abs(abs(xs[g.argmin()]) - 0.79) < 0.01
    # at the chord midpoint itself g = 20 f^2 + f f_xx > 0
    fm = 101.01 * 1.01
    assert discriminant_g(f, 10.0, [0.0, 0.1, -10.0], [1, 0, 0]) == pytest.approx(20 * fm**2 - 4 * 101.01 * fm)


def test_double_exp_bracket_fixtures():
    one = Polynomial.constant(1.0, 2)
    for N in (0.5, 3.0):
        assert bracket_double_exp(one, N, [0.2, 0.1], [0.2, 0.1], [1.0, 0.0]) == pytest.approx(2 * N)
    # second x-derivative at the center: 2N f + f_xx with f = 2t^-2 + t^-4 + 1, f_xx = -4t^2
    t, N = 10.0, 10.0
    xi = [0.0, 1 / t, -t]
    val = bracket_double_exp(double_exp_counterexample(), N, xi, xi, [1.0, 0.0, 0.0])
    assert val == pytest.approx(2 * N * (2 / t**2 + 1 / t**4 + 1) - 4 * t**2, rel=1e-12)
    assert val < 0


def test_double_exp_bracket_reports_cap_and_keeps_sign():
    val, capped = bracket_double_exp(POS2, 50.0, [0, 0], [3.0, 3.0], [0.6, 0.8], return_capped=True)
    assert capped and val > 0


def test_non_unit_direction_rejected():
    with pytest.raises(ArgumentError):
        bracket_theta(POS2, 1.0, [0, 0], [0, 0], [1.0, 1.0])


def _second_derivative_fd(s, x, beta, h=1e-4):
    v = [s.value(x + k * h * beta) for k in (-1, 0, 1)]
    return (v[0] - 2 * v[1] + v[2]) / h**2


@given(st.sampled_from(list(Family)), st.floats(0.2, 2),
       st.lists(st.floats(-0.6, 0.6), min_size=2, max_size=2),
       st.lists(st.floats(-0.6, 0.6), min_size=2, max_size=2), st.floats(0, 2 * np.pi))
def test_bracket_matches_finite_difference_second_derivative(fam, N, x, xi, theta):
    """bracket times its positive prefactor is the second derivative along the line."""
    s = spec(fam, N, xi, POS2)
    x = np.array(x)
    beta = np.array([math.cos(theta), math.sin(theta)])
    sq = float((x - s.xi) @ (x - s.xi))
    log_factor = {Family.SINGLE_EXP: N * sq,
                  Family.DOUBLE_EXP_OUTER: math.exp(N * sq) + N * sq,
                  Family.DOUBLE_EXP_INNER: N * math.exp(sq) + sq}[s.family]
    exact = s.bracket(x, beta) * math.exp(log_factor)
    fd = _second_derivative_fd(s, x, beta)
    assert fd == pytest.approx(exact, rel=1e-4, abs=1e-4 * math.exp(log_factor))


@given(st.floats(0.1, 5), st.lists(st.floats(-2, 2), min_size=4, max_size=4), st.floats(0, 2 * np.pi))
def test_theta_sign_invariant_under_direction_flip(N, v, theta):
    xi, x = v[:2], v[2:]
    beta = np.array([math.cos(theta), math.sin(theta)])
    a = bracket_theta(POS2, N, xi, x, beta)
    b = bracket_theta(POS2, N, xi, x, -beta)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_positive_g_implies_positive_theta_for_all_centers():
    rng = np.random.default_rng(1)
    N = 4.0
    pts = rng.uniform(-1, 1, size=(100, 2))
    ang = rng.uniform(0, 2 * np.pi, 100)
    B = np.c_[np.cos(ang), np.sin(ang)]
    g = discriminant_g_many(POS2, N, pts, B)
    checked = 0
    for x, beta, gv in zip(pts, B, g):
        if gv > 0:
            for xi in rng.normal(scale=5, size=(100, 2)):
                assert bracket_theta(POS2, N, xi, x, beta) > 0
            checked += 1
    assert checked > 50


@given(st.floats(0.1, 10), st.floats(0.01, 10), st.lists(st.floats(-2, 2), min_size=2, max_size=2),
       st.floats(0, 2 * np.pi))
def test_g_strictly_increasing_in_n(N, dN, x, theta):
    beta = [math.cos(theta), math.sin(theta)]
    assert discriminant_g(POS2, N + dN, x, beta) > discriminant_g(POS2, N, x, beta)


@given(st.integers(0, 10**6), st.floats(0.2, 3))
def test_grid_argmin_of_log_value_equals_direct(seed, N):
    rng = np.random.default_rng(seed)
    lo = rng.uniform(-1, 0, 2)
    hi = lo + rng.uniform(0.2, 1.5, 2)
    s = spec(rng.choice(["single", "double-outer"]), N, rng.uniform(lo, hi), POS2)
    g = np.stack(np.meshgrid(np.linspace(lo[0], hi[0], 41), np.linspace(lo[1], hi[1], 41)), -1).reshape(-1, 2)
    logs = s.log_value_many(g)
    assume(np.all(logs < 600))
    direct = np.array([s.value(p) for p in g])
    assert np.argmin(logs) == np.argmin(direct)
