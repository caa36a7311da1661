"""Proximal search for lower critical points.

Starting from ``a0`` the iteration is ``a_nu = argmin_X phi_{N, a_{nu-1}}``
with a convexified function centered at the previous point. Each accepted
step decreases ``f`` by at least a multiple of the squared step length,
which is checked per step against the sampled modulus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import verifier
from .certificates import Family, f_d_star, k_bb, shift_constant
from .convexifier import ConvexifierSpec
from .exceptions import ArgumentError, ConfigurationError, DomainError, PreconditionError
from .polynomial import Polynomial
from .region import Ball, Box, Polytope, SemialgebraicSet
from .solver import argmin

CONVERGED, DIVERGED, BUDGET = "converged", "diverged_to_infinity", "budget_exhausted"
LEMMA_RTOL = 1e-9


@dataclass
class ProximalConfig:
    """Settings for :func:`proximal_search`.

    ``family`` and ``N`` are chosen automatically when left as ``None``.
    For the double-exponential route ``N`` is re-selected whenever the
    center leaves the ball it was verified on. Automatic exponents are
    unrefined powers of two, which leaves headroom above the sampled
    convexity threshold.
    """

    family: Family | str | None = None
    N: float | None = None
    step_tol: float = 1e-7
    budget: int = 10_000
    solver_tol: float = 1e-10
    solver_max_iter: int = 10_000
    verify_budget: int = 1000
    n_xi: int = 8
    n_max: float = 2.0**20
    lct_tol: float = 1e-5
    divergence_factor: float = 10.0
    divergence_streak: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.family is not None:
            self.family = Family(self.family)
        if self.N is not None and not self.N > 0:
            raise ArgumentError("N must be positive")
        if not self.step_tol > 0 or self.budget < 1:
            raise ArgumentError("step_tol must be positive and budget at least 1")


@dataclass
class IterationTrace:
    points: list = field(default_factory=list)
    f_values: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    N_values: list = field(default_factory=list)
    mu_values: list = field(default_factory=list)
    lemma63_checks: list = field(default_factory=list)
    status: str = BUDGET
    family: Family = Family.SINGLE_EXP
    shift: float = 0.0
    route: str = ""
    working: Polynomial | None = None
    lower_critical: bool | None = None

    @property
    def limit(self) -> np.ndarray:
        return self.points[-1]

    @property
    def mu_hat(self) -> float:
        return float(min(self.mu_values)) if self.mu_values else math.nan

    def records(self) -> list[dict]:
        """One record per step followed by a summary record."""
        out = []
        for nu in range(1, len(self.points)):
            out.append({
                "nu": nu,
                "point": [float(t) for t in self.points[nu]],
                "f": float(self.f_values[nu]),
                "step_norm": float(self.step_norms[nu - 1]),
                "N": float(self.N_values[nu - 1]),
                "mu_hat": float(self.mu_values[nu - 1]),
                "lemma63": bool(self.lemma63_checks[nu - 1]),
            })
        out.append({
            "summary": True,
            "status": self.status,
            "limit": [float(t) for t in self.limit],
            "steps": len(self.points) - 1,
            "family": self.family.value,
            "route": self.route,
            "shift": float(self.shift),
            "lower_critical": self.lower_critical,
            "lemma63_all": bool(all(self.lemma63_checks)),
        })
        return out


def lower_critical_test(f: Polynomial, X, a, tol: float = 1e-5, s: float = 1e-6) -> bool:
    """First-order stationarity of ``f`` on ``X`` via the projected-gradient residual.

    True iff ``|a - P(a - s grad f(a))| / s <= tol``.
    """
    a = np.asarray(a, dtype=float)
    if not X.member(a, tol=1e-8):
        raise DomainError("point is not in the region", point=a)
    r = np.linalg.norm(a - X.project(a - s * f.gradient(a))) / s
    return bool(r <= tol)


def _decrease_holds(spec: ConvexifierSpec, a_prev, a_next, mu) -> bool:
    """``phi_{a_prev}(a_next) + mu/2 |a_next - a_prev|^2 <= phi_{a_prev}(a_prev)``."""
    lhs_log = spec.log_value(a_next)
    rhs_log = spec.log_value(a_prev)
    d2 = float(np.sum((np.asarray(a_next) - np.asarray(a_prev)) ** 2))
    lhs = math.exp(lhs_log - rhs_log) + 0.5 * max(mu, 0.0) * d2 * math.exp(-rhs_log)
    return lhs <= 1.0 + LEMMA_RTOL


def check_lemma63(trace: IterationTrace, mu_hat: float | None = None) -> list[bool]:
    """Per-step sufficient-decrease check.

    With ``phi`` the convexified working polynomial centered at ``a_nu``
    (exponent ``N`` as recorded), each step must satisfy
    ``phi(a_{nu+1}) + (mu/2)|a_{nu+1} - a_nu|^2 <= phi(a_nu)``. For the
    single-exponential family this is
    ``f(a_{nu+1}) e^{N|step|^2} + (mu/2)|step|^2 <= f(a_nu)``.
    ``mu_hat`` defaults to the per-step modulus stored in the trace.
    """
    out = []
    for nu in range(1, len(trace.points)):
        mu = trace.mu_values[nu - 1] if mu_hat is None else mu_hat
        spec = ConvexifierSpec(trace.family, trace.N_values[nu - 1], trace.points[nu - 1], trace.working)
        out.append(_decrease_holds(spec, trace.points[nu - 1], trace.points[nu], mu))
    return out


def _is_semialgebraic(X) -> bool:
    return isinstance(X, (Box, Ball, Polytope, SemialgebraicSet))


class _Route:
    """Chooses the family, exponent and modulus for each step."""

    def __init__(self, f, X, a0, cfg: ProximalConfig):
        self.cfg = cfg
        self.X = X
        self.bounded = X.bounding_box() is not None
        self.shift = 0.0
        self.kf = None
        self.working = f
        self._r = -1.0
        self._sample = None
        if self.bounded:
            # every center lies in X, so one ball covers the whole run
            self._r = float(X.radius_bound())
            try:
                verifier.check_positive(f, X, cfg.verify_budget, cfg.seed)
            except DomainError:
                lo, hi = X.bounding_box()
                R = float(np.max(np.maximum(np.abs(lo), np.abs(hi))))
                self.shift = shift_constant(f, R)
                self.working = f + self.shift
            self.family = cfg.family or Family.SINGLE_EXP
            self.name = "compact" if self.shift == 0 else "compact+shift"
        else:
            fds = f_d_star(f, seed=cfg.seed)
            if cfg.family in (None, Family.SINGLE_EXP) and fds > 0:
                self.family = Family.SINGLE_EXP
                self.kf = k_bb(f, fds)
                self.name = "noncompact-single"
            elif cfg.family is Family.SINGLE_EXP and cfg.N is None:
                raise PreconditionError(
                    "single-exponential route on an unbounded region needs a positive leading form off the origin"
                )
            else:
                if not _is_semialgebraic(X):
                    raise ConfigurationError(
                        "the double-exponential route needs a semialgebraic region"
                    )
                self.family = cfg.family or Family.DOUBLE_EXP_OUTER
                self.name = "noncompact-double"
        self.N = cfg.N
        self.mu = None
        if self.N is None and self.family is Family.SINGLE_EXP:
            self.N = 1.0 if self.shift else verifier.practical_n(
                Family.SINGLE_EXP, self.working, X, None, cfg.n_max, cfg.verify_budget, seed=cfg.seed,
                refine=False).N
            if self.N is None:
                raise PreconditionError(f"no verified exponent up to {cfg.n_max}")

    def _radius(self):
        """Sampling radius for unbounded regions: twice the center ball, at least ``2 K(f)``."""
        if self.bounded:
            return None
        return max(2 * self.kf, self._r) if self.kf is not None else self._r

    def _grow(self, a_prev) -> bool:
        """Enlarge the center ball when ``a_prev`` leaves it; True if it changed."""
        if self.bounded:
            return False
        need = float(np.linalg.norm(a_prev)) + 1
        if need > self._r:
            self._r = 2 * need
            return True
        return False

    def step_params(self, a_prev):
        """``(N, mu)`` for the step centered at ``a_prev``."""
        cfg = self.cfg
        grew = self._grow(a_prev)
        if self.family is Family.SINGLE_EXP:
            if self.mu is None or grew:
                self.mu = verifier.uniform_modulus(self.working, self.N, self.X, cfg.verify_budget,
                                                   cfg.seed, n_local=2, radius=self._radius())
            return self.N, self.mu
        # double exponential: exponent verified for centers in a ball, re-selected when the center leaves it
        if cfg.N is None and (grew or self.N is None):
            res = verifier.practical_n(self.family, self.working, self.X, self._r, cfg.n_max,
                                       cfg.verify_budget, n_xi=cfg.n_xi, seed=cfg.seed, n_local=2,
                                       radius=self._radius(), refine=False)
            if res.N is None:
                raise PreconditionError(f"no verified exponent up to {cfg.n_max}")
            self.N = res.N
        R = self._radius()
        if self._sample is None or self._sample.radius != R:
            self._sample = verifier._sample_pairs(self.working, self.X, cfg.verify_budget, cfg.seed, R)
        spec = ConvexifierSpec(self.family, self.N, a_prev, self.working)
        mu = verifier._verify(spec, self.X, self._sample, cfg.seed, 1, False).margin
        return self.N, mu


def proximal_search(f: Polynomial, X, a0, config: ProximalConfig | None = None) -> IterationTrace:
    """Run the proximal iteration from ``a0``.

    Stops when a step is at most ``step_tol / max(1, 2 N f(a_nu))``
    (converged), when the iterate
    escapes past ``divergence_factor * max(K(f), |a0|, 1)`` while growing for
    ``divergence_streak`` consecutive steps (unbounded regions only), or
    after ``budget`` steps.

    Returns
    -------
    IterationTrace
        ``f_values`` refer to the working polynomial, which equals ``f``
        plus ``shift``; the shift is nonzero only when ``f`` was not
        positive on a compact region.
    """
    cfg = config or ProximalConfig()
    if f.is_zero():
        raise DomainError("zero polynomial")
    a = np.asarray(a0, dtype=float)
    if a.size != f.num_vars:
        raise ArgumentError("a0 has the wrong dimension")
    if not X.member(a, tol=1e-8):
        raise DomainError("a0 is not in the region", point=a)
    route = _Route(f, X, a, cfg)
    g = route.working
    trace = IterationTrace(points=[a], f_values=[g.evaluate(a)], family=route.family,
                           shift=route.shift, route=route.name, working=g)
    escape = cfg.divergence_factor * max(route.kf or 0.0, float(np.linalg.norm(a)), 1.0)
    growing = 0
    for _ in range(cfg.budget):
        N, mu = route.step_params(a)
        spec = ConvexifierSpec(route.family, N, a, g)
        res = argmin(spec, X, tol=cfg.solver_tol, max_iter=cfg.solver_max_iter, x0=a, seed=cfg.seed)
        a_next = res.minimizer
        step = float(np.linalg.norm(a_next - a))
        trace.points.append(a_next)
        trace.f_values.append(g.evaluate(a_next))
        trace.step_norms.append(step)
        trace.N_values.append(float(N))
        trace.mu_values.append(float(mu))
        trace.lemma63_checks.append(_decrease_holds(spec, a, a_next, mu))
        # residual of the step's first-order condition is about 2 N f |step|
        if step <= cfg.step_tol / max(1.0, 2 * N * trace.f_values[-1]):
            trace.status = CONVERGED
            break
        if not route.bounded:
            growing = growing + 1 if np.linalg.norm(a_next) > np.linalg.norm(a) else 0
            if np.linalg.norm(a_next) > escape and growing >= cfg.divergence_streak:
                trace.status = DIVERGED
                break
        a = a_next
    if trace.status == CONVERGED:
        trace.lower_critical = lower_critical_test(f, X, trace.limit, cfg.lct_tol)
    return trace
