"""Constrained minimization of a convexified polynomial.

The solver runs projected gradient descent on ``log_value``. The logarithm
is monotone, so it has the same minimizer and the same first-order
(projected) stationary points as the convexified function, and it never
overflows. Strong convexity of the convexified function makes that
stationary point unique, even where the logarithm itself is not convex.
The first-order conditions of the logarithm are rational in the polynomial
data, so the argmin step stays an algebraic problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .certificates import Family
from .convexifier import ConvexifierSpec
from .exceptions import ArgumentError, DimensionError, StallError, UnsupportedProjectionError

ARMIJO_C = 1e-4
MAX_HALVINGS = 60
REFRESH_AFTER = 10
MAX_GROWTH = 1e6


@dataclass
class SolveResult:
    minimizer: np.ndarray
    log_value_at_min: float
    iterations: int
    grad_map_norm: float
    converged: bool

    def to_json(self) -> dict:
        return {
            "minimizer": [float(t) for t in self.minimizer],
            "log_value_at_min": float(self.log_value_at_min),
            "iterations": int(self.iterations),
            "grad_map_norm": float(self.grad_map_norm),
            "converged": bool(self.converged),
        }


def _log_f_lipschitz(f, points) -> float:
    """Largest spectral norm of the Hessian of ``ln f`` over ``points`` (``f > 0`` assumed)."""
    fv, g, H = f.jet(points)
    ok = fv > 0
    if not ok.any():
        return 0.0
    fv, g, H = fv[ok], g[ok], H[ok]
    hl = H / fv[:, None, None] - np.einsum("mi,mj->mij", g, g) / (fv**2)[:, None, None]
    return float(np.max(np.linalg.norm(hl, ord=2, axis=(1, 2))))


def _exponent_curvature(spec: ConvexifierSpec, x) -> float:
    """Spectral bound of the Hessian of the exponential term at ``x``."""
    N = spec.N
    d = np.asarray(x) - spec.xi
    sq = float(d @ d)
    if spec.family is Family.SINGLE_EXP:
        return 2 * N
    if spec.family is Family.DOUBLE_EXP_OUTER:
        e = math.exp(min(N * sq, 700.0))
        return 2 * N * e + 4 * N * N * e * sq
    e = math.exp(min(sq, 700.0))
    return 2 * N * e + 4 * N * e * sq


def _lipschitz_points(X, x, seed, m=64):
    box = X.bounding_box()
    if box is not None:
        pts = X.sample(m, seed=seed)
    else:
        from .sampling import ball_points

        pts = np.array([X.project(p) for p in ball_points(m, len(x), center=x, radius=1.0, seed=seed)])
    return np.vstack([pts, x[None, :]]) if len(pts) else x[None, :]


def argmin(spec: ConvexifierSpec, X, tol: float = 1e-8, max_iter: int = 10000, x0=None,
           seed: int = 0) -> SolveResult:
    """Projected gradient descent with Armijo backtracking on ``log_value``.

    The first trial step is ``eta0 = 1/(c + L)`` with ``c`` the curvature of
    the exponential term and ``L`` a sampled bound on the Hessian of
    ``ln f``. Later searches start from the Barzilai-Borwein step of the
    previous iteration (kept within ``[1e-3, 1e6] * eta0``), which keeps
    the method first-order while avoiding zigzag in curved valleys.

    Parameters
    ----------
    spec : ConvexifierSpec
        Should be strongly convex on ``X``; otherwise only a stationary
        point is found.
    X : ConvexRegion
        Must support projection.
    tol : float
        Stop when the gradient mapping norm is at most ``tol``.
    x0 : array_like, optional
        Starting point, projected onto ``X``. Defaults to the center ``xi``.

    Raises
    ------
    DomainError
        If ``f <= 0`` at an evaluated point.
    StallError
        If backtracking fails to decrease after 60 halvings.
    """
    if not X.supports_projection():
        raise UnsupportedProjectionError("argmin needs a region with a projection oracle")
    if not tol > 0 or max_iter < 0:
        raise ArgumentError("tol must be positive and max_iter nonnegative")
    n = spec.f.num_vars
    x = X.project(spec.xi if x0 is None else np.asarray(x0, dtype=float))
    if x.size != n:
        raise DimensionError("starting point dimension mismatch")
    L_hat = _log_f_lipschitz(spec.f, _lipschitz_points(X, x, seed))
    eta0 = 1.0 / (_exponent_curvature(spec, x) + L_hat + 1e-12)
    val = spec.log_value(x)
    streak = 0
    eta_try = eta0
    gm = math.inf
    it = 0
    g = spec.log_gradient(x)
    for it in range(max_iter + 1):
        gm = float(np.linalg.norm(x - X.project(x - eta0 * g)) / eta0)
        if gm <= tol or it == max_iter:
            break
        eta = eta_try
        slack = 4 * np.finfo(float).eps * max(abs(val), 1.0)
        for halvings in range(MAX_HALVINGS + 1):
            x_new = X.project(x - eta * g)
            val_new = spec.log_value(x_new)
            if val_new <= val + ARMIJO_C * float(g @ (x_new - x)) + slack:
                break
            eta *= 0.5
        else:
            raise StallError(f"line search failed after {MAX_HALVINGS} halvings at x = {x.tolist()}")
        # Barzilai-Borwein trial step for the next search
        g_new = spec.log_gradient(x_new)
        sk, yk = x_new - x, g_new - g
        sy = float(sk @ yk)
        eta_try = min(float(sk @ sk) / sy, MAX_GROWTH * eta0) if sy > 0 else eta0
        eta_try = max(eta_try, eta0 * 1e-3)
        streak = streak + 1 if halvings > 0 else 0
        if streak >= REFRESH_AFTER:
            L_hat = _log_f_lipschitz(spec.f, _lipschitz_points(X, x_new, seed + it))
            eta0 = 1.0 / (_exponent_curvature(spec, x_new) + L_hat + 1e-12)
            streak = 0
        if np.array_equal(x_new, x):
            # no representable progress left
            break
        x, val, g = x_new, val_new, g_new
    return SolveResult(x, float(val), it, gm, gm <= tol)


def grid_oracle(spec: ConvexifierSpec, X, resolution: int = 101) -> np.ndarray:
    """Brute-force grid argmin of ``log_value`` over a bounded region with ``n <= 3``.

    The grid has ``resolution`` points per axis over the region's bounding
    box; only member points are scored.
    """
    n = spec.f.num_vars
    if n > 3:
        raise ArgumentError("grid_oracle supports at most 3 variables")
    box = X.bounding_box()
    if box is None:
        raise ArgumentError("grid_oracle needs a bounded region")
    if resolution < 2:
        raise ArgumentError("resolution must be at least 2")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(*box)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    inside = X.member_many(grid, 1e-12)
    pts = grid[inside] if inside.any() else np.array([X.project(p) for p in grid])
    vals = spec.log_value_many(pts)
    return pts[int(np.argmin(vals))]


def grid_step(X, resolution: int) -> float:
    """Largest per-axis spacing used by :func:`grid_oracle`."""
    lo, hi = X.bounding_box()
    return float(np.max(hi - lo) / (resolution - 1))
