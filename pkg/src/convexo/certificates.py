"""Effective constants for exponential convexification.

Every sufficient exponent here comes from a closed formula; the ones that
explode (integer-coefficient bounds, double-exponential thresholds) are
computed as :class:`~convexo.logscalar.LogScalar`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree
from scipy.special import gammaln

from . import sampling
from .exceptions import ArgumentError, PreconditionError, UndefinedDegreeError
from .logscalar import LogScalar
from .polynomial import Polynomial

THM_COMPACT = "Thm2.3"
THM_INTEGER = "Thm3.3"
THM_NONCOMPACT = "Thm4.3"
THM_DOUBLE_EXP = "Thm5.1+Rmk5.2"


class Family(str, Enum):
    """Convexifying factor family."""

    SINGLE_EXP = "single"
    DOUBLE_EXP_OUTER = "double-outer"
    DOUBLE_EXP_INNER = "double-inner"


@dataclass(frozen=True)
class LojasiewiczData:
    """Constants of ``f(x) >= C (1 + |x|^K)^(-L)`` on the region."""

    C: float
    K: int
    L: int
    certified: bool = True

    def __post_init__(self):
        if not self.C > 0:
            raise ArgumentError("Lojasiewicz constant C must be positive")
        if int(self.K) != self.K or self.K < 1:
            raise ArgumentError("K must be a positive integer")
        if int(self.L) != self.L or self.L < 0:
            raise ArgumentError("L must be a nonnegative integer")


@dataclass
class CertifiedExponent:
    """A theorem-backed exponent and, optionally, the smallest verified one."""

    family: Family
    n_certified: LogScalar
    provenance: str
    inputs: dict = field(default_factory=dict)
    n_practical: float | None = None

    def __post_init__(self):
        if self.n_certified.sign != 1:
            raise ArgumentError("certified exponent must be positive")

    def to_json(self) -> dict:
        return {
            "family": self.family.value,
            "certified_N": self.n_certified.to_json(),
            "practical_N": self.n_practical,
            "provenance": self.provenance,
            "inputs": self.inputs,
        }


def n_of_m_d(m: float, D: float) -> float:
    """``D/(2m) + D^2/(2m^2)``, the single-exponential sufficient exponent."""
    if not (m > 0 and D > 0):
        raise ArgumentError(f"n_of_m_d needs m > 0 and D > 0, got m={m!r}, D={D!r}")
    r = D / m
    return 0.5 * r + 0.5 * r * r


def n_of_m_d_log(m: LogScalar, D: LogScalar) -> LogScalar:
    """:func:`n_of_m_d` for log-scale inputs."""
    if m.sign != 1 or D.sign != 1:
        raise ArgumentError("n_of_m_d_log needs positive m and D")
    r = D / m
    return r * 0.5 + (r * r) * 0.5


def _check_radius(R):
    if not R > 0:
        raise ArgumentError(f"radius must be positive, got {R!r}")


def d_n(f: Polynomial, R: float) -> float:
    """Derivative-coefficient bound ``max{1, sum j|a|R^(j-1), sum j(j-1)|a|R^(j-2)}``."""
    _check_radius(R)
    s = f.abs_coeff_sums()
    j = np.arange(len(s), dtype=float)
    first = math.fsum(j[1:] * s[1:] * R ** (j[1:] - 1))
    second = math.fsum(j[2:] * (j[2:] - 1) * s[2:] * R ** (j[2:] - 2))
    return max(1.0, first, second)


def d_n_log(f: Polynomial, R: LogScalar) -> LogScalar:
    """:func:`d_n` for a log-scale radius."""
    if R.sign != 1:
        raise ArgumentError("radius must be positive")
    s = f.abs_coeff_sums()
    first = LogScalar(0)
    second = LogScalar(0)
    for j in range(1, len(s)):
        if s[j] == 0:
            continue
        first = first + LogScalar.from_float(j * s[j]) * (R ** (j - 1))
        if j >= 2:
            second = second + LogScalar.from_float(j * (j - 1) * s[j]) * (R ** (j - 2))
    return max(LogScalar.from_float(1.0), first, second)


def k_univariate(f: Polynomial) -> float:
    """Cauchy-type root radius ``2 max_i |a_i/a_0|^(1/i)`` of a univariate polynomial."""
    if f.is_zero() or not f.degree:
        raise UndefinedDegreeError("k_univariate needs a polynomial of degree >= 1")
    a = f.univariate_coeffs()
    ratios = [abs(a[i] / a[0]) ** (1.0 / i) for i in range(1, len(a))]
    return 2.0 * max(ratios)


def _sphere_samples(n, samples, seed):
    """Sample points on the unit sphere and a covering-radius estimate (geodesic)."""
    if n == 2:
        theta = 2 * np.pi * np.arange(samples) / samples
        return np.stack([np.cos(theta), np.sin(theta)], axis=1), np.pi / samples
    pts = sampling.unit_directions(samples, n, seed=seed)
    probes = sampling.unit_directions(4 * samples, n, seed=seed + 1)
    chord, _ = cKDTree(pts).query(probes)
    h = 2 * np.arcsin(np.minimum(1.0, chord.max() / 2))
    # probes only see part of the sphere
    return pts, 1.25 * float(h)


def f_d_star(f: Polynomial, samples: int = 4096, seed: int = 0) -> float:
    """Lower estimate of ``min f_d`` over the unit sphere.

    Sphere samples are refined by local descent from the 10 best; the
    returned value is the smaller of the refined minimum and the covering
    bound ``min_s [f_d(x_s) - G_s h - D h^2]`` where ``h`` is the mesh width,
    ``G_s`` the tangential gradient at ``x_s`` and ``D = D_n(f_d, 1)``.
    For ``n = 1`` the sphere is ``{-1, 1}`` and the result is exact; for
    ``n = 2`` the mesh is equiangular and ``h`` exact; for ``n >= 3`` the
    mesh width is estimated by probing.
    """
    if f.is_zero() or not f.degree:
        raise UndefinedDegreeError("f_d_star needs a nonconstant polynomial")
    fd = f.leading_form()
    n = f.num_vars
    if n == 1:
        return float(min(fd.evaluate([1.0]), fd.evaluate([-1.0])))
    pts, h = _sphere_samples(n, samples, seed)
    vals, grads, _ = fd.jet(pts)
    # tangential part of the gradient
    tang = grads - np.einsum("mi,mi->m", grads, pts)[:, None] * pts
    lam = d_n(fd, 1.0)
    bound = float(np.min(vals - np.linalg.norm(tang, axis=1) * h - lam * h * h))

    def on_sphere(u):
        r = np.linalg.norm(u)
        return fd.evaluate(u / r) if r > 0 else np.inf

    refined = float(vals.min())
    for k in np.argsort(vals)[:10]:
        res = minimize(on_sphere, pts[k], method="BFGS", options={"maxiter": 200, "gtol": 1e-12})
        refined = min(refined, float(res.fun))
    return min(refined, bound)


def _fds_or_raise(f, fds):
    if fds is None:
        fds = f_d_star(f)
    if not fds > 0:
        raise PreconditionError(
            "leading form must be positive off the origin (f_d^{-1}(0) = {0}); "
            f"sphere minimum estimate is {fds:.3g}"
        )
    return fds


def k_bb(f: Polynomial, fds: float | None = None) -> float:
    """Radius ``2 ||f|| / f_d*`` beyond which ``f`` grows like ``|x|^d``."""
    fds = _fds_or_raise(f, fds)
    return 2.0 * f.norm_1() / fds


def m_of_f(f: Polynomial, fds: float | None = None) -> float:
    """Growth constant: ``f(x) >= m(f) |x|^d`` for ``|x| >= k_bb(f)``."""
    fds = _fds_or_raise(f, fds)
    K = k_bb(f, fds)
    d = f.degree
    s = f.abs_coeff_sums()
    return fds - math.fsum(K ** (j - d) * s[j] for j in range(d))


def jpt_bound(n: int, d: int, H: float, k: int) -> LogScalar:
    """Lower bound on the minimum of a positive integer polynomial on a compact
    basic semialgebraic set (degrees <= even ``d``, coefficients <= ``H``, ``k`` constraints)."""
    if int(d) != d or d <= 0 or d % 2:
        raise ArgumentError(f"degree bound d must be a positive even integer, got {d!r}")
    if int(n) != n or n < 1 or int(k) != k or k < 1:
        raise ArgumentError("n and k must be positive integers")
    if H < 1:
        raise ArgumentError("H must be at least 1")
    inner = (4 - n / 2) * math.log(2) + math.log(max(H, 2 * n + 2 * k)) + n * math.log(d)
    expo = n * 2.0**n * float(d) ** n
    return LogScalar(1, -expo * inner)


def integer_compact_bounds(f: Polynomial, constraints, l: int = 0) -> tuple[LogScalar, LogScalar]:
    """Radius bound ``R`` and minimum bound ``m`` for integer data on a compact set.

    ``constraints`` lists the polynomials g_1..g_k, the first ``l`` being
    equalities. An odd common degree bound is rounded up to the next even
    integer. Compactness is the caller's claim.
    """
    constraints = list(constraints)
    k = len(constraints)
    if not 0 <= l <= k:
        raise ArgumentError("number of equalities must be between 0 and len(constraints)")
    if k == 0:
        raise ArgumentError("integer_compact_bounds needs at least one constraint")
    polys = [f] + constraints
    if not all(p.is_integer() for p in polys):
        raise ArgumentError("integer_compact_bounds needs integer coefficients")
    n = f.num_vars
    d = max(p.degree or 0 for p in polys)
    d = max(2, d + (d % 2))
    H = max(max(p.coeff_stats()[1] for p in polys if not p.is_zero()), 1.0)
    m = jpt_bound(n, d, H, k)
    b = jpt_bound(n + 1, max(d, 4), H, k + 2)
    # log(1/b - 1) = -log b + log1p(-b); b underflows to 0 at log scale
    log_r2 = -b.log_mag + math.log1p(-math.exp(b.log_mag))
    R = LogScalar(1, 0.5 * log_r2)
    return R, m


def d_tilde(f: Polynomial) -> float:
    """``|a_0| + sum_{|nu|=1} |a_nu| + sum_{j>=2} j(j-1) sum_{|nu|=j} |a_nu|``."""
    s = f.abs_coeff_sums()
    total = s[0] + (s[1] if len(s) > 1 else 0.0)
    total += math.fsum(j * (j - 1) * s[j] for j in range(2, len(s)))
    return total


def n0_double_exp(f: Polynomial, loja: LojasiewiczData) -> LogScalar:
    """Sufficient exponent for the outer double exponential from Lojasiewicz data.

    With ``k = (L+2)K + 1`` returns the larger of
    ``k! max_i Dt^2 C^-2 2^(L+2-i) binom(L+2, i)`` and ``Dt^2 C^-2 3^(L+2)``.
    Returned as a LogScalar since ``k!`` overflows quickly.
    """
    if f.is_zero():
        raise UndefinedDegreeError("n0_double_exp needs a nonzero polynomial")
    Dt = d_tilde(f)
    L2 = loja.L + 2
    k = L2 * loja.K + 1
    base = 2 * math.log(Dt) - 2 * math.log(loja.C)
    log_binom = [gammaln(L2 + 1) - gammaln(i + 1) - gammaln(L2 - i + 1) for i in range(L2 + 1)]
    first = gammaln(k + 1) + base + max((L2 - i) * math.log(2) + log_binom[i] for i in range(L2 + 1))
    second = base + L2 * math.log(3)
    return LogScalar(1, max(first, second))


def shift_constant(f: Polynomial, R: float) -> float:
    """Additive constant making ``f + shift >= D`` on ``|x_i| <= R`` with ``D = D_n(f, 2R) + 1``."""
    _check_radius(R)
    s = f.abs_coeff_sums() if not f.is_zero() else np.zeros(1)
    m = -math.fsum(R**j * s[j] for j in range(len(s)))
    D = d_n(f, 2 * R) + 1.0
    return -m + D


# numerical helpers feeding the certified routes


def min_bounds(f: Polynomial, region, radius: float | None = None, rtol: float = 1e-3,
               atol: float = 1e-9, max_boxes: int = 20000, batch: int = 64, seed: int = 0):
    """Branch-and-bound enclosure ``(lower, upper)`` of ``min f`` over the region.

    Boxes come from bisecting the region's bounding box (cut to
    ``|x_i| <= radius`` when given); lower bounds use the natural interval
    extension, upper bounds come from member points. Rounding is not
    directed, so ``lower`` is a bound up to floating-point error.
    """
    box = region.bounding_box()
    n = f.num_vars
    if radius is not None:
        lo0, hi0 = np.full(n, -radius), np.full(n, radius)
        if box is not None:
            lo0, hi0 = np.maximum(lo0, box[0]), np.minimum(hi0, box[1])
    elif box is None:
        raise ArgumentError("min_bounds on an unbounded region needs a radius")
    else:
        lo0, hi0 = box
    pts = region.sample(256, seed=seed, radius=radius)
    upper = float(f(pts).min()) if len(pts) else math.inf
    lb0 = float(f.interval_bounds(lo0, hi0)[0][0])
    heap = [(lb0, 0, lo0, hi0)]
    counter = 1
    lower = lb0
    while heap and counter < max_boxes:
        lower = heap[0][0]
        if upper - lower <= atol + rtol * abs(upper):
            break
        popped = [heapq.heappop(heap) for _ in range(min(batch, len(heap)))]
        los, his = [], []
        for _, _, lo, hi in popped:
            axis = int(np.argmax(hi - lo))
            mid = 0.5 * (lo[axis] + hi[axis])
            left_hi = hi.copy()
            left_hi[axis] = mid
            right_lo = lo.copy()
            right_lo[axis] = mid
            los += [lo, right_lo]
            his += [left_hi, hi]
        los, his = np.array(los), np.array(his)
        keep = region.intersects_boxes(los, his)
        los, his = los[keep], his[keep]
        if len(los) == 0:
            continue
        lbs, _ = f.interval_bounds(los, his)
        centers = 0.5 * (los + his)
        inside = region.member_many(centers, 0.0)
        if radius is not None:
            inside &= np.linalg.norm(centers, axis=1) <= radius
        if inside.any():
            upper = min(upper, float(f(centers[inside]).min()))
        for lb, lo, hi in zip(lbs, los, his):
            if lb <= upper:
                heapq.heappush(heap, (float(lb), counter, lo, hi))
                counter += 1
    lower = heap[0][0] if heap else upper
    return min(lower, upper), upper


def estimate_lojasiewicz(f: Polynomial, region, samples: int = 4000, seed: int = 0,
                         radii=(1.0, 10.0, 100.0, 1000.0), max_L: int = 6) -> LojasiewiczData:
    """Non-certified estimate of ``(C, K, L)`` by sampled minimization.

    ``K`` is the degree of ``f``. ``L`` is the smallest exponent for which the
    sampled minimum of ``f(x)(1+|x|^K)^L`` stops shrinking across the radii,
    and ``C`` is half that minimum.
    """
    K = max(f.degree or 1, 1)
    box = region.bounding_box()
    if box is not None:
        R = float(np.linalg.norm(np.maximum(np.abs(box[0]), np.abs(box[1]))))
        radii = [r for r in radii if r < R] + [R]
    shells = []
    for r in radii:
        pts = region.sample(samples, seed=seed, radius=r if box is None or r < radii[-1] else None)
        if len(pts):
            shells.append(pts)
    best = None
    for L in range(max_L + 1):
        mins = []
        for pts in shells:
            w = f(pts) * (1 + np.linalg.norm(pts, axis=1) ** K) ** L
            mins.append(float(w.min()))
        if mins[-1] <= 0:
            raise PreconditionError("f is not positive on the sampled region")
        best = (L, mins[-1])
        if len(mins) == 1 or mins[-1] >= 0.5 * mins[-2]:
            break
    L, cmin = best
    return LojasiewiczData(C=0.5 * cmin, K=K, L=L, certified=False)


def certify(f: Polynomial, region, family: Family | str = Family.SINGLE_EXP,
            loja: LojasiewiczData | None = None, seed: int = 0) -> CertifiedExponent:
    """Theorem-backed sufficient exponent for the given family and region.

    Route selection: bounded single-exp regions use the compact bound (or the
    integer-coefficient bound for integer semialgebraic data without a radius
    hint); unbounded single-exp regions need a positive leading form;
    double-exponential families use the Lojasiewicz route.
    """
    family = Family(family)
    if f.is_zero():
        raise UndefinedDegreeError("zero polynomial")
    inputs: dict = {}
    if family is not Family.SINGLE_EXP:
        if loja is None:
            loja = estimate_lojasiewicz(f, region, seed=seed)
        n0 = n0_double_exp(f, loja)
        inputs.update(C=loja.C, K=loja.K, L=loja.L, loja_certified=loja.certified, D_tilde=d_tilde(f))
        return CertifiedExponent(family, n0, THM_DOUBLE_EXP, inputs)

    from .region import SemialgebraicSet

    if (isinstance(region, SemialgebraicSet) and region.radius_hint is None and region.bounded
            and f.is_integer() and all(g.is_integer() for g in region.constraints)):
        R, m = integer_compact_bounds(f, region.constraints, len(region.eq))
        D = d_n_log(f, R)
        inputs.update(R_log10=R.log10, m_log10=m.log10, D_log10=D.log10)
        return CertifiedExponent(family, n_of_m_d_log(m, D), THM_INTEGER, inputs)

    R = region.radius_bound()
    geometric_box = region.bounding_box()
    if R is not None and geometric_box is not None:
        m, _ = min_bounds(f, region, seed=seed)
        if not m > 0:
            raise PreconditionError(f"could not certify f > 0 on the region (lower bound {m:.3g})")
        D = d_n(f, R)
        inputs.update(R=R, m=m, D=D)
        return CertifiedExponent(family, LogScalar.from_float(n_of_m_d(m, D)), THM_COMPACT, inputs)

    fds = f_d_star(f, seed=seed)
    Kf = k_bb(f, fds)
    mf = m_of_f(f, fds)
    m, _ = min_bounds(f, region, radius=Kf, seed=seed)
    if not m > 0:
        raise PreconditionError(f"could not certify f > 0 on the region (lower bound {m:.3g})")
    D = d_n(f, Kf)
    N = max(n_of_m_d(m, D), n_of_m_d(mf, d_n(f, 1.0)))
    inputs.update(f_d_star=fds, K_f=Kf, m_f=mf, m=m, D=D, R=Kf)
    return CertifiedExponent(family, LogScalar.from_float(N), THM_NONCOMPACT, inputs)
