import numpy as np
import pytest

from convexo.certificates import Family
from convexo.critical import (BUDGET, CONVERGED, DIVERGED, ProximalConfig, check_lemma63, lower_critical_test,
                              proximal_search)
from convexo.exceptions import ArgumentError, ConfigurationError, DomainError, PreconditionError
from convexo.polynomial import Polynomial
from convexo.region import Ball, Box, ConvexRegion, Polytope

(T,) = Polynomial.variables(1)
X, Y = Polynomial.variables(2)
PLANE = Polytope(np.zeros((0, 2)), np.zeros(0), num_vars=2)


def assert_good_trace(tr):
    assert all(tr.lemma63_checks) and all(check_lemma63(tr))
    for p in tr.points:
        assert np.isfinite(p).all()
    steps = np.array(tr.step_norms)
    fv = np.array(tr.f_values)
    assert np.all(fv[1:] <= fv[:-1])
    # strict once the step is resolvable in floating point
    moved = steps > 1e-6
    assert np.all(fv[1:][moved] < fv[:-1][moved])


def test_quadratic_on_box_reaches_origin():
    tr = proximal_search(X**2 + Y**2 + 1, Box([-1, -1], [1, 1]), [1.0, 1.0])
    assert tr.status == CONVERGED and tr.lower_critical
    np.testing.assert_allclose(tr.limit, [0, 0], atol=1e-5)
    assert tr.route == "compact" and tr.shift == 0
    assert_good_trace(tr)
    for p in tr.points:
        assert Box([-1, -1], [1, 1]).member(p, tol=1e-8)


def test_boundary_critical_point():
    tr = proximal_search((T - 2) ** 2 + 1, Box([0], [1]), [0.0])
    assert tr.status == CONVERGED and tr.lower_critical
    assert tr.limit[0] == pytest.approx(1.0, abs=1e-6)
    assert_good_trace(tr)


def test_sign_changing_polynomial_uses_shift():
    tr = proximal_search(T**3 - T, Box([-2], [2]), [1.5])
    assert tr.route == "compact+shift" and tr.shift > 0 and set(tr.N_values) == {1.0}
    assert tr.status == CONVERGED and tr.lower_critical
    assert tr.limit[0] == pytest.approx(1 / np.sqrt(3), abs=1e-5)
    assert_good_trace(tr)


def test_restart_from_limit_is_fixed_point():
    cfg = ProximalConfig()
    tr = proximal_search(X**2 + 2 * Y**2 + X + 3, Ball([0, 0], 2.0), [1.0, 1.0], cfg)
    again = proximal_search(X**2 + 2 * Y**2 + X + 3, Ball([0, 0], 2.0), tr.limit, cfg)
    assert again.status == CONVERGED and len(again.points) == 2
    assert again.step_norms[0] <= cfg.step_tol
    assert check_lemma63(again) == [True]


def test_unbounded_single_route():
    tr = proximal_search(X**2 + Y**2 + 1, PLANE, [1.0, 1.0])
    assert tr.route == "noncompact-single" and tr.status == CONVERGED
    np.testing.assert_allclose(tr.limit, [0, 0], atol=1e-5)


def test_divergence_to_infinity():
    # (xy - 1)^2 + y^2 > 0 has infimum 0 approached only as x -> infinity
    tr = proximal_search((X * Y - 1) ** 2 + Y**2, PLANE, [1.0, 1.0], ProximalConfig(budget=1000))
    assert tr.route == "noncompact-double" and tr.family is Family.DOUBLE_EXP_OUTER
    assert tr.status == DIVERGED
    assert np.linalg.norm(tr.limit) > 10
    assert_good_trace(tr)


def test_fixed_exponent_double_exp_on_box():
    cfg = ProximalConfig(family="double-outer", N=2.0)
    tr = proximal_search(X**2 + Y**2 + 1, Box([-1, -1], [1, 1]), [0.5, -0.5], cfg)
    assert tr.status == CONVERGED and set(tr.N_values) == {2.0}
    np.testing.assert_allclose(tr.limit, [0, 0], atol=1e-5)


def test_budget_exhausted_status():
    tr = proximal_search(T**3 - T, Box([-2], [2]), [1.5], ProximalConfig(budget=3))
    assert tr.status == BUDGET and len(tr.points) == 4 and tr.lower_critical is None


def test_records_layout():
    tr = proximal_search(X**2 + Y**2 + 1, Box([-1, -1], [1, 1]), [1.0, 1.0])
    recs = tr.records()
    assert [r["nu"] for r in recs[:-1]] == list(range(1, len(tr.points)))
    assert recs[-1]["summary"] and recs[-1]["status"] == CONVERGED and recs[-1]["lemma63_all"]


def test_input_errors():
    with pytest.raises(DomainError):
        proximal_search(X**2 + 1, Box([-1, -1], [1, 1]), [3.0, 0.0])
    with pytest.raises(ArgumentError):
        proximal_search(X**2 + 1, Box([-1, -1], [1, 1]), [0.0])
    with pytest.raises(ArgumentError):
        ProximalConfig(step_tol=0.0)
    with pytest.raises(PreconditionError):
        proximal_search(X**2 + 1, PLANE, [0.0, 0.0], ProximalConfig(family="single"))


class _HalfPlaneNoDescription(ConvexRegion):
    """Unbounded convex region given only through oracles."""

    num_vars = 2

    def member_many(self, P, tol=1e-9):
        return np.atleast_2d(P)[:, 1] >= -tol

    def project(self, x):
        return np.array([x[0], max(x[1], 0.0)])

    def clip_line(self, alpha, beta):
        return None

    def radius_bound(self):
        return None

    def bounding_box(self):
        return None

    def intersects_boxes(self, lo, hi):
        return np.atleast_2d(hi)[:, 1] >= 0

    def sample(self, m, seed=0, radius=None):
        return np.zeros((0, 2))

    def to_json(self):
        return {}


def test_double_route_requires_semialgebraic_region():
    with pytest.raises(ConfigurationError):
        proximal_search(X**2 + 1, _HalfPlaneNoDescription(), [0.0, 1.0])


def test_lower_critical_test_fixtures():
    B = Box([0], [1])
    assert lower_critical_test(T, B, [0.0])
    assert not lower_critical_test(T, B, [0.5])
    assert lower_critical_test(X**2 + Y**2 + 1, Ball([0, 0], 1.0), [0.0, 0.0])
    with pytest.raises(DomainError):
        lower_critical_test(T, B, [2.0])


def test_check_lemma63_rejects_inflated_modulus():
    tr = proximal_search(X**2 + Y**2 + 1, Box([-1, -1], [1, 1]), [1.0, 1.0])
    assert not all(check_lemma63(tr, mu_hat=1e6))
