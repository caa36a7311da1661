"""Sampled strong-convexity verification and practical exponent search.

A "pass" here is empirical: no negative bracket was found among
quasi-random (point, direction) pairs, region vertices and local
minimizations from the worst samples. Theorem-backed exponents live in
:mod:`convexo.certificates`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import sampling
from .certificates import Family, f_d_star, k_bb
from .convexifier import ConvexifierSpec, discriminant_g_many
from .exceptions import ArgumentError, DomainError, PreconditionError
from .polynomial import Polynomial

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"
# a positive minimum this small relative to the bracket's terms is not trusted
STRICTNESS = 1e-9


@dataclass
class VerificationResult:
    status: str
    margin: float
    samples: int
    seed: int
    witness: dict | None = None
    label: str = "empirically verified"

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        out = {"status": self.status, "margin": self.margin, "samples": self.samples,
               "seed": self.seed, "label": self.label}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass
class _PairSample:
    points: np.ndarray
    betas: np.ndarray
    jet: tuple
    radius: float | None


def sampling_radius(f: Polynomial, X, family, radius=None):
    """Radius cut used when sampling an unbounded region (``None`` if bounded)."""
    if X.bounding_box() is not None:
        return None
    interest = radius if radius is not None else X.radius_hint
    if Family(family) is Family.SINGLE_EXP:
        fds = f_d_star(f)
        if fds > 0:
            return max(2 * k_bb(f, fds), interest or 0.0)
        if interest is None:
            raise PreconditionError(
                "unbounded region with a leading form that vanishes off the origin: "
                "the single-exponential route needs f_d^{-1}(0) = {0} or a radius_hint"
            )
        return float(interest)
    if interest is None:
        raise ArgumentError("unbounded region: double-exponential verification needs a radius of interest")
    return float(interest)


def _sample_pairs(f, X, budget, seed, radius) -> _PairSample:
    n = f.num_vars
    pts = X.sample(budget, seed=seed, radius=radius)
    betas = sampling.unit_directions(len(pts), n, seed=seed + 1)
    verts = X.vertices()
    if radius is not None and len(verts):
        verts = verts[np.linalg.norm(verts, axis=1) <= radius]
    if len(verts):
        eye = np.eye(n)
        dirs = np.vstack([eye, -eye, sampling.unit_directions(2 * n, n, seed=seed + 2)])
        vp = np.repeat(verts, len(dirs), axis=0)
        vb = np.tile(dirs, (len(verts), 1))
        pts = np.vstack([pts, vp])
        betas = np.vstack([betas, vb])
    return _PairSample(pts, betas, f.jet(pts), radius)


def _bracket_fn(spec: ConvexifierSpec, uniform_xi: bool):
    if uniform_xi:
        if spec.family is not Family.SINGLE_EXP:
            raise ArgumentError("center-uniform verification is only defined for the single-exponential family")
        return lambda X, B, jet=None: discriminant_g_many(spec.f, spec.N, X, B, jet=jet)
    return spec.bracket_many


def _data_scale(f, N, power=1):
    """Magnitude of the bracket's polynomial terms at a point, used for the strictness test."""

    def scale(x, beta):
        fv = f.evaluate(x)
        fb, fbb = f.directional_derivs(x, beta)
        base = N * abs(fv) + abs(fb) + abs(fbb)
        return base * abs(fv) ** (power - 1) + (fb * fb if power == 2 else 0.0)

    return scale


def _verify(spec, X, sample: _PairSample, seed, n_local, uniform_xi) -> VerificationResult:
    scale = _data_scale(spec.f, spec.N, 2 if uniform_xi else 1)
    return _minimize_bracket(_bracket_fn(spec, uniform_xi), spec.f.num_vars, X, sample, seed, n_local, scale)


def _minimize_bracket(fn, n, X, sample: _PairSample, seed, n_local, scale) -> VerificationResult:
    vals = fn(sample.points, sample.betas, jet=sample.jet)
    m = len(vals)
    if m == 0:
        return VerificationResult(INCONCLUSIVE, math.nan, 0, seed)
    best = int(np.argmin(vals))
    best_val, best_x, best_b = float(vals[best]), sample.points[best], sample.betas[best]
    R = sample.radius
    can_project = X.supports_projection()

    def objective(z):
        u, v = z[:n], z[n:]
        nv = np.linalg.norm(v)
        if nv == 0:
            return math.inf
        x = X.project(u) if can_project else u
        if not can_project and not X.member(x):
            return math.inf
        if R is not None and np.linalg.norm(x) > R:
            return math.inf
        return float(fn(x[None, :], (v / nv)[None, :])[0])

    order = np.argsort(vals)[: max(0, n_local)]
    for k in order:
        if best_val <= 0:
            break
        z0 = np.concatenate([sample.points[k], sample.betas[k]])
        with np.errstate(invalid="ignore"):
            res = minimize(objective, z0, method="Nelder-Mead",
                           options={"maxfev": 150 * 2 * n, "xatol": 1e-10, "fatol": 1e-14})
        if res.fun < best_val:
            u, v = res.x[:n], res.x[n:]
            best_val = float(res.fun)
            best_x = X.project(u) if can_project else u
            best_b = v / np.linalg.norm(v)
    witness = {"x": [float(t) for t in best_x], "beta": [float(t) for t in best_b], "value": best_val}
    if best_val <= 0:
        return VerificationResult(FAIL, best_val, m, seed, witness)
    if best_val <= STRICTNESS * max(scale(np.asarray(best_x), np.asarray(best_b)), 1e-300):
        return VerificationResult(INCONCLUSIVE, best_val, m, seed, witness)
    return VerificationResult(PASS, best_val, m, seed)


def verify_convexity(spec: ConvexifierSpec, X, budget: int = 1000, seed: int = 0, n_local: int = 10,
                     uniform_xi: bool = False, radius: float | None = None) -> VerificationResult:
    """Sampled check that the convexified function is strongly convex on ``X``.

    Parameters
    ----------
    spec : ConvexifierSpec
    X : ConvexRegion
    budget : int
        Number of quasi-random (point, direction) pairs, at least 100.
    uniform_xi : bool
        Single-exponential only: check the center-free discriminant, which
        certifies the bracket for every center at once.
    radius : float, optional
        Radius of interest for unbounded regions (defaults to ``X.radius_hint``).

    Returns
    -------
    VerificationResult
        ``fail`` carries a witness ``(x, beta)`` with a nonpositive bracket;
        ``pass`` reports the minimized bracket as ``margin``.
    """
    if budget < 100:
        raise ArgumentError("verification budget must be at least 100")
    R = sampling_radius(spec.f, X, spec.family, radius)
    sample = _sample_pairs(spec.f, X, budget, seed, R)
    return _verify(spec, X, sample, seed, n_local, uniform_xi)


@dataclass
class PracticalResult:
    N: float | None
    history: list = field(default_factory=list)
    mu_hat: float | None = None

    def to_json(self) -> dict:
        return {"practical_N": self.N, "mu_hat": self.mu_hat,
                "history": [{"N": N, "status": s, "margin": m} for N, s, m in self.history]}


def check_positive(f: Polynomial, X, budget=1000, seed=0, radius=None):
    """Sampled precheck that ``f > 0`` on ``X``; raises :class:`DomainError` with a witness."""
    pts = X.sample(budget, seed=seed + 3, radius=radius)
    verts = X.vertices()
    if len(verts):
        pts = np.vstack([pts, verts])
    vals = f(pts)
    k = int(np.argmin(vals))
    if not vals[k] > 0:
        raise DomainError(f"f is not positive on the region: f(x) = {vals[k]:.6g}", point=pts[k])
    return float(vals[k])


def practical_n(family, f: Polynomial, X, xi_radius: float | None = None, n_max: float = 2.0**20,
                budget: int = 1000, n_xi: int = 20, seed: int = 0, n_local: int = 3,
                radius: float | None = None, refine: bool = True, rel_tol: float = 1 / 16,
                n_min: float = 2.0**-6) -> PracticalResult:
    """Smallest ``N`` that passes verification for sampled centers.

    ``N`` doubles from 1 until verification passes. With ``refine`` the
    passing value is then lowered: halved while it still passes (down to
    ``n_min``), then bisected against the last failure until the bracket is
    within ``rel_tol``. ``xi_radius=None`` (single-exponential only) means
    unrestricted centers, checked through the center-free discriminant.
    Otherwise ``n_xi`` centers with ``|xi| <= xi_radius`` are sampled.
    Returns ``N=None`` when nothing up to ``n_max`` passes. Each center
    refines only its ``n_local`` worst samples, fewer than a single
    :func:`verify_convexity` call, since the search runs many of them.
    """
    family = Family(family)
    n = f.num_vars
    if xi_radius is None and family is not Family.SINGLE_EXP:
        raise ArgumentError("double-exponential families need a bounded center radius")
    R = sampling_radius(f, X, family, radius)
    check_positive(f, X, budget, seed, R)
    sample = _sample_pairs(f, X, budget, seed, R)
    if xi_radius is None or xi_radius == 0:
        centers = [np.zeros(n)]
    else:
        centers = list(sampling.ball_points(n_xi, n, radius=xi_radius, seed=seed + 5))
    out = PracticalResult(None)

    def attempt(N):
        margins = []
        status = PASS
        for xi in centers:
            res = _verify(ConvexifierSpec(family, N, xi, f), X, sample, seed, n_local, xi_radius is None)
            margins.append(res.margin)
            if not res.passed:
                status = res.status
                break
        margin = float(min(margins))
        out.history.append((N, status, margin))
        return status == PASS, margin

    N, failed = 1.0, 0.0
    while N <= n_max:
        ok, margin = attempt(N)
        if ok:
            out.N, out.mu_hat = N, margin
            break
        failed = N
        N *= 2
    if out.N is None or not refine:
        return out
    while failed == 0.0 and out.N / 2 >= n_min:
        ok, margin = attempt(out.N / 2)
        if not ok:
            failed = out.N / 2
            break
        out.N, out.mu_hat = out.N / 2, margin
    while failed > 0 and out.N - failed > rel_tol * out.N:
        mid = 0.5 * (failed + out.N)
        ok, margin = attempt(mid)
        if ok:
            out.N, out.mu_hat = mid, margin
        else:
            failed = mid
    return out


def uniform_modulus(f: Polynomial, N: float, X, budget: int = 1000, seed: int = 0, n_local: int = 10,
                    radius: float | None = None) -> float:
    """Sampled ``min g/f`` over ``X``, the smallest single-exponential bracket over all centers.

    For fixed ``(x, beta)`` the bracket is a quadratic in ``y`` whose minimum
    is ``2N f + f_beta_beta - f_beta^2 / f``, so this is a center-free
    estimate of the strong-convexity modulus.
    """
    R = sampling_radius(f, X, Family.SINGLE_EXP, radius)
    sample = _sample_pairs(f, X, budget, seed, R)

    def fn(P, B, jet=None):
        jet = f.jet(P) if jet is None else jet
        return discriminant_g_many(f, N, P, B, jet=jet) / jet[0]

    return _minimize_bracket(fn, f.num_vars, X, sample, seed, n_local, _data_scale(f, N)).margin


# analytic counterexamples


def single_exp_counterexample() -> Polynomial:
    """Positive polynomial whose leading form vanishes off the origin."""
    x, y, z = Polynomial.variables(3)
    return (y**2 + z**2 + 1) * ((x - 1) ** 2 * (x + 1) ** 2 + (y * z + 1) ** 2 + y**2)


def double_exp_counterexample() -> Polynomial:
    """Positive polynomial defeating center-uniform double-exponential convexification."""
    x, y, z = Polynomial.variables(3)
    return ((y * z + 1) ** 2 + y**2) * ((x * z**2 - 1) ** 2 * (x * z**2 + 1) ** 2 + y**2 + z**2 + 1)


def single_exp_gap(N: float, s: float) -> dict:
    """Log of the convexified function at the chord ends ``(+-1, 1/s, -s)`` minus at its midpoint."""
    spec = ConvexifierSpec(Family.SINGLE_EXP, N, np.zeros(3), single_exp_counterexample())
    mid = spec.log_value([0.0, 1 / s, -s])
    ends = [spec.log_value([e, 1 / s, -s]) for e in (-1.0, 1.0)]
    return {"N": N, "xi": s, "log_mid": mid, "log_ends": ends, "log_gap": max(ends) - mid}


def double_exp_center_value(N: float, t: float) -> float:
    """``2N f(xi_t) + d^2f/dx^2(xi_t)`` at ``xi_t = (0, 1/t, -t)``."""
    f = double_exp_counterexample()
    xi = np.array([0.0, 1 / t, -t])
    return 2 * N * f.evaluate(xi) + f.hessian(xi)[0, 0]


def reproduce_counterexamples(ns_single=(1, 2, 5, 10), ns_double=(1, 10, 100), min_gap: float = 0.1) -> dict:
    """Search witnesses for both counterexamples.

    Single-exponential: for each N, scan ``xi = e^{N/2} c`` for
    ``c = 1, 2, 4, ...`` until the chord-end log values undercut the midpoint
    by ``min_gap``. Double-exponential: for each N, scan ``t = 1, 2, 4, ...``
    until the scaled second derivative at the center turns negative.
    """
    report = {"single_exp": [], "double_exp": []}
    for N in ns_single:
        hit = None
        for j in range(60):
            c = 2.0**j
            w = single_exp_gap(N, math.exp(N / 2) * c)
            if w["log_gap"] <= -min_gap:
                hit = dict(w, c=c)
                break
        report["single_exp"].append(hit if hit else {"N": N, "found": False})
    for N in ns_double:
        hit = None
        for j in range(60):
            t = 2.0**j
            v = double_exp_center_value(N, t)
            if v < 0:
                hit = {"N": N, "t": t, "value": v}
                break
        report["double_exp"].append(hit if hit else {"N": N, "found": False})
    report["ok"] = all("found" not in w for w in report["single_exp"] + report["double_exp"])
    return report
