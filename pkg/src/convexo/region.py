"""Convex feasible sets: boxes, balls, halfspace polytopes and basic semialgebraic sets."""

from __future__ import annotations

import itertools
import math
from abc import ABC, abstractmethod
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from . import sampling
from .exceptions import ArgumentError, DimensionError, UnsupportedProjectionError
from .polynomial import Polynomial, check_unit

DYKSTRA_TOL = 1e-12
DYKSTRA_MAX_SWEEPS = 100_000


class ConvexRegion(ABC):
    """A closed convex subset of R^n.

    ``radius_hint``, when given, is a caller-asserted bound ``max |x| <= R``
    over the region.
    """

    num_vars: int
    radius_hint: float | None = None

    def _point(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.num_vars:
            raise DimensionError(f"expected a point of dimension {self.num_vars}, got shape {x.shape}")
        return x

    def _points(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.num_vars:
            raise DimensionError(f"expected points with {self.num_vars} columns, got shape {X.shape}")
        return X

    def member(self, x, tol: float = 1e-9) -> bool:
        return bool(self.member_many(self._point(x)[None, :], tol)[0])

    @abstractmethod
    def member_many(self, X, tol: float = 1e-9) -> np.ndarray: ...

    @abstractmethod
    def project(self, x) -> np.ndarray: ...

    @abstractmethod
    def clip_line(self, alpha, beta) -> tuple[float, float] | None:
        """Feasible interval of ``t`` with ``beta*t + alpha`` in the region, or ``None``."""

    @abstractmethod
    def radius_bound(self) -> float | None:
        """Upper bound on ``max |x|`` over the region; ``None`` when unbounded."""

    @abstractmethod
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Axis-aligned box containing the region, or ``None`` if there is none."""

    @abstractmethod
    def intersects_boxes(self, lo, hi) -> np.ndarray:
        """Conservative test: False only when box ``k`` misses the region."""

    @abstractmethod
    def to_json(self) -> dict: ...

    @property
    def is_bounded(self) -> bool:
        return self.radius_bound() is not None

    def supports_projection(self) -> bool:
        return True

    def vertices(self) -> np.ndarray:
        return np.empty((0, self.num_vars))

    def sample(self, m: int, seed: int = 0, radius: float | None = None) -> np.ndarray:
        """Up to ``m`` quasi-random points of the region.

        With ``radius`` (required for unbounded regions) points are also cut
        to ``|x| <= radius``. Uses rejection from
        the bounding box; may return fewer points for thin regions.
        """
        box = self.bounding_box()
        if box is None or radius is not None:
            if radius is None:
                raise ArgumentError("sampling an unbounded region needs a radius")
            lo, hi = np.full(self.num_vars, -radius), np.full(self.num_vars, radius)
            if box is not None:
                lo, hi = np.maximum(lo, box[0]), np.minimum(hi, box[1])
        else:
            lo, hi = box
        out = []
        have = 0
        for attempt in range(20):
            cand = sampling.box_points(4 * m + 16, lo, hi, seed=seed + 7919 * attempt)
            mask = self.member_many(cand, 0.0)
            if radius is not None:
                mask &= np.linalg.norm(cand, axis=1) <= radius
            keep = cand[mask]
            out.append(keep)
            have += len(keep)
            if have >= m:
                break
        pts = np.concatenate(out)[:m]
        return pts


class Box(ConvexRegion):
    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float).ravel()
        self.hi = np.asarray(hi, dtype=float).ravel()
        if self.lo.shape != self.hi.shape or self.lo.size == 0:
            raise DimensionError("lo and hi must be nonempty and of equal length")
        if np.any(self.lo > self.hi):
            raise ArgumentError("box needs lo <= hi componentwise")
        self.num_vars = self.lo.size

    def __repr__(self):
        return f"Box(lo={self.lo.tolist()}, hi={self.hi.tolist()})"

    def member_many(self, X, tol=1e-9):
        X = self._points(X)
        return np.all((X >= self.lo - tol) & (X <= self.hi + tol), axis=1)

    def project(self, x):
        return np.clip(self._point(x), self.lo, self.hi)

    def clip_line(self, alpha, beta):
        alpha, beta = self._point(alpha), check_unit(beta)
        return _clip_halfspaces(
            np.vstack([np.eye(self.num_vars), -np.eye(self.num_vars)]),
            np.concatenate([self.hi, -self.lo]),
            alpha,
            beta,
        )

    def radius_bound(self):
        return float(np.linalg.norm(np.maximum(np.abs(self.lo), np.abs(self.hi))))

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def vertices(self):
        corners = itertools.product(*zip(self.lo, self.hi))
        return np.unique(np.array(list(corners), dtype=float), axis=0)

    def intersects_boxes(self, lo, hi):
        lo, hi = np.atleast_2d(lo), np.atleast_2d(hi)
        return np.all((lo <= self.hi) & (hi >= self.lo), axis=1)

    def to_json(self):
        return {"type": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class Ball(ConvexRegion):
    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float).ravel()
        self.radius = float(radius)
        if not self.radius > 0:
            raise ArgumentError("ball radius must be positive")
        self.num_vars = self.center.size

    def __repr__(self):
        return f"Ball(center={self.center.tolist()}, radius={self.radius})"

    def member_many(self, X, tol=1e-9):
        X = self._points(X)
        return np.linalg.norm(X - self.center, axis=1) <= self.radius + tol

    def project(self, x):
        x = self._point(x)
        v = x - self.center
        r = np.linalg.norm(v)
        if r <= self.radius:
            return x
        return self.center + v * (self.radius / r)

    def clip_line(self, alpha, beta):
        alpha, beta = self._point(alpha), check_unit(beta)
        w = alpha - self.center
        b = float(beta @ w)
        disc = b * b - (float(w @ w) - self.radius**2)
        if disc < 0:
            return None
        s = math.sqrt(disc)
        return (-b - s, -b + s)

    def radius_bound(self):
        return float(np.linalg.norm(self.center) + self.radius)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def intersects_boxes(self, lo, hi):
        lo, hi = np.atleast_2d(lo), np.atleast_2d(hi)
        nearest = np.clip(self.center, lo, hi)
        return np.linalg.norm(nearest - self.center, axis=1) <= self.radius

    def sample(self, m, seed=0, radius=None):
        return sampling.ball_points(m, self.num_vars, self.center, self.radius, seed=seed)

    def to_json(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


class Polytope(ConvexRegion):
    """Intersection of halfspaces ``<a_i, x> <= b_i``; an empty list means R^n."""

    def __init__(self, A, b, num_vars: int | None = None, radius_hint: float | None = None):
        A = np.asarray(A, dtype=float)
        if A.size == 0:
            if num_vars is None:
                raise ArgumentError("a polytope without halfspaces needs num_vars")
            A = np.empty((0, num_vars))
        A = np.atleast_2d(A)
        self.A = A
        self.b = np.asarray(b, dtype=float).ravel()
        if self.A.shape[0] != self.b.size:
            raise DimensionError("A and b disagree on the number of halfspaces")
        if np.any(np.linalg.norm(self.A, axis=1) == 0):
            raise ArgumentError("halfspace normals must be nonzero")
        self.num_vars = self.A.shape[1]
        self.radius_hint = radius_hint
        self._radius = ...
        self._box = ...

    @classmethod
    def from_halfspaces(cls, halfspaces: Sequence[dict], num_vars=None, radius_hint=None):
        A = [h["a"] for h in halfspaces]
        b = [h["b"] for h in halfspaces]
        return cls(A, b, num_vars=num_vars, radius_hint=radius_hint)

    def __repr__(self):
        return f"Polytope({self.A.shape[0]} halfspaces in R^{self.num_vars})"

    def member_many(self, X, tol=1e-9):
        X = self._points(X)
        if self.A.shape[0] == 0:
            return np.ones(X.shape[0], dtype=bool)
        return np.all(X @ self.A.T <= self.b + tol, axis=1)

    def project(self, x):
        """Euclidean projection by Dykstra's alternating projections."""
        x = self._point(x)
        if self.member(x, 0.0):
            return x.copy()
        A, b = self.A, self.b
        norms2 = np.einsum("ij,ij->i", A, A)
        incr = np.zeros_like(A)
        cur = x.copy()
        for _ in range(DYKSTRA_MAX_SWEEPS):
            prev = cur.copy()
            for i in range(A.shape[0]):
                y = cur + incr[i]
                viol = A[i] @ y - b[i]
                cur = y - (viol / norms2[i]) * A[i] if viol > 0 else y
                incr[i] = y - cur
            if np.linalg.norm(cur - prev) < DYKSTRA_TOL:
                break
        return cur

    def clip_line(self, alpha, beta):
        alpha, beta = self._point(alpha), check_unit(beta)
        return _clip_halfspaces(self.A, self.b, alpha, beta)

    def _support(self, c):
        """max <c, x> over the polytope, or inf when unbounded."""
        if self.A.shape[0] == 0:
            return math.inf
        res = linprog(-c, A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * self.num_vars, method="highs")
        if res.status == 3:
            return math.inf
        if res.status == 2:
            raise ArgumentError("polytope is empty")
        return -res.fun

    def bounding_box(self):
        if self._box is ...:
            n = self.num_vars
            hi = np.array([self._support(np.eye(n)[i]) for i in range(n)])
            lo = -np.array([self._support(-np.eye(n)[i]) for i in range(n)])
            self._box = None if np.any(np.isinf(hi)) or np.any(np.isinf(lo)) else (lo, hi)
        return None if self._box is None else (self._box[0].copy(), self._box[1].copy())

    def vertices(self):
        n = self.num_vars
        if self.bounding_box() is None or n > 3:
            return np.empty((0, n))
        verts = []
        for idx in itertools.combinations(range(self.A.shape[0]), n):
            M = self.A[list(idx)]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            v = np.linalg.solve(M, self.b[list(idx)])
            if self.member(v, 1e-9):
                verts.append(v)
        if not verts:
            return np.empty((0, n))
        return np.unique(np.round(np.array(verts), 12), axis=0)

    def radius_bound(self):
        if self._radius is ...:
            box = self.bounding_box()
            if box is None:
                self._radius = self.radius_hint
            elif self.num_vars <= 3:
                V = self.vertices()
                self._radius = float(np.linalg.norm(V, axis=1).max())
            else:
                lo, hi = box
                self._radius = float(np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))))
        return self._radius

    def intersects_boxes(self, lo, hi):
        lo, hi = np.atleast_2d(lo), np.atleast_2d(hi)
        if self.A.shape[0] == 0:
            return np.ones(lo.shape[0], dtype=bool)
        low = np.minimum(lo[:, None, :] * self.A[None], hi[:, None, :] * self.A[None]).sum(axis=2)
        return np.all(low <= self.b + 1e-12, axis=1)

    def to_json(self):
        out = {
            "type": "polytope",
            "vars": self.num_vars,
            "halfspaces": [{"a": a.tolist(), "b": float(bi)} for a, bi in zip(self.A, self.b)],
        }
        if self.radius_hint is not None:
            out["radius_hint"] = self.radius_hint
        return out


class SemialgebraicSet(ConvexRegion):
    """``{x : g(x) = 0 for g in eq, g(x) >= 0 for g in geq}``, declared convex by the caller.

    Convexity is not verified. Projection requires a user-supplied oracle.
    """

    def __init__(
        self,
        eq: Sequence[Polynomial] = (),
        geq: Sequence[Polynomial] = (),
        radius_hint: float | None = None,
        projector: Callable | None = None,
        bounded: bool | None = None,
        num_vars: int | None = None,
        debug: bool = False,
    ):
        self.eq = list(eq)
        self.geq = list(geq)
        polys = self.eq + self.geq
        if num_vars is None:
            if not polys:
                raise ArgumentError("need at least one constraint or num_vars")
            num_vars = polys[0].num_vars
        if any(g.num_vars != num_vars for g in polys):
            raise DimensionError("constraints disagree on the number of variables")
        self.num_vars = num_vars
        self.radius_hint = None if radius_hint is None else float(radius_hint)
        self.projector = projector
        self.bounded = bounded
        if debug:
            self.check_midpoint_convexity()

    def __repr__(self):
        return f"SemialgebraicSet(eq={len(self.eq)}, geq={len(self.geq)}, radius_hint={self.radius_hint})"

    @property
    def constraints(self) -> list[Polynomial]:
        return self.eq + self.geq

    def member_many(self, X, tol=1e-9):
        X = self._points(X)
        ok = np.ones(X.shape[0], dtype=bool)
        for g in self.eq:
            ok &= np.abs(g(X)) <= tol
        for g in self.geq:
            ok &= g(X) >= -tol
        return ok

    def supports_projection(self):
        return self.projector is not None

    def project(self, x):
        if self.projector is None:
            raise UnsupportedProjectionError("semialgebraic regions need a caller-supplied projection oracle")
        return np.asarray(self.projector(self._point(x)), dtype=float)

    def clip_line(self, alpha, beta):
        raise UnsupportedProjectionError("line clipping is only available for boxes, balls and polytopes")

    def integer_radius_bound(self):
        """Radius bound for integer-coefficient descriptions, as a LogScalar."""
        from .certificates import integer_compact_bounds

        R, _ = integer_compact_bounds(Polynomial.constant(1.0, self.num_vars), self.constraints, len(self.eq))
        return R

    def radius_bound(self):
        if self.radius_hint is not None:
            return self.radius_hint
        if self.bounded and self.constraints and all(g.is_integer() for g in self.constraints):
            return self.integer_radius_bound().to_float()
        return None

    def bounding_box(self):
        R = self.radius_bound()
        if R is None or math.isinf(R):
            return None
        return np.full(self.num_vars, -R), np.full(self.num_vars, R)

    def intersects_boxes(self, lo, hi):
        lo, hi = np.atleast_2d(lo), np.atleast_2d(hi)
        ok = np.ones(lo.shape[0], dtype=bool)
        for g in self.eq:
            g_lo, g_hi = g.interval_bounds(lo, hi)
            ok &= (g_lo <= 0) & (g_hi >= 0)
        for g in self.geq:
            ok &= g.interval_bounds(lo, hi)[1] >= 0
        return ok

    def sample(self, m, seed=0, radius=None):
        if self.eq and self.projector is not None:
            box = self.bounding_box()
            if box is None:
                if radius is None:
                    raise ArgumentError("sampling an unbounded region needs a radius")
                box = (np.full(self.num_vars, -radius), np.full(self.num_vars, radius))
            pts = sampling.box_points(m, *box, seed=seed)
            return np.array([self.project(p) for p in pts])
        return super().sample(m, seed, radius)

    def check_midpoint_convexity(self, chords: int = 1000, seed: int = 0, radius: float = 10.0) -> bool:
        """Sampled sanity check: midpoints of chords between members stay members."""
        pts = self.sample(2 * chords, seed=seed, radius=None if self.bounding_box() else radius)
        k = len(pts) // 2
        if k == 0:
            return True
        mids = 0.5 * (pts[:k] + pts[k : 2 * k])
        ok = bool(np.all(self.member_many(mids, 1e-9)))
        if not ok:
            raise ArgumentError("declared-convex semialgebraic set failed the midpoint check")
        return ok

    def to_json(self):
        out = {
            "type": "semialgebraic",
            "eq": [g.to_json() for g in self.eq],
            "geq": [g.to_json() for g in self.geq],
        }
        if self.radius_hint is not None:
            out["radius_hint"] = self.radius_hint
        if self.bounded is not None:
            out["bounded"] = self.bounded
        return out


def _clip_halfspaces(A, b, alpha, beta):
    lo, hi = -math.inf, math.inf
    slope = A @ beta
    slack = b - A @ alpha
    for s, r in zip(slope, slack):
        if abs(s) < 1e-15:
            if r < 0:
                return None
        elif s > 0:
            hi = min(hi, r / s)
        else:
            lo = max(lo, r / s)
    if lo > hi:
        return None
    return (lo, hi)


def region_from_json(obj: dict, num_vars: int | None = None) -> ConvexRegion:
    """Parse the JSON region formats (box, ball, polytope, semialgebraic)."""
    kind = obj.get("type")
    hint = obj.get("radius_hint")
    if kind == "box":
        return Box(obj["lo"], obj["hi"])
    if kind == "ball":
        return Ball(obj["center"], obj["radius"])
    if kind == "polytope":
        return Polytope.from_halfspaces(obj.get("halfspaces", []), num_vars=obj.get("vars", num_vars), radius_hint=hint)
    if kind == "semialgebraic":
        return SemialgebraicSet(
            eq=[Polynomial.from_json(g) for g in obj.get("eq", [])],
            geq=[Polynomial.from_json(g) for g in obj.get("geq", [])],
            radius_hint=hint,
            bounded=obj.get("bounded"),
            num_vars=obj.get("vars", num_vars),
        )
    raise ArgumentError(f"unknown region type {kind!r}")
