"""Sparse multivariate polynomials over the reals.

Terms are kept as a map from exponent vectors to nonzero float coefficients,
ordered graded-lexicographically so evaluation and serialization are
deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
from numpy.polynomial import polynomial as npoly

from .exceptions import ArgumentError, DimensionError, UndefinedDegreeError

UNIT_TOL = 1e-9


def _grlex_key(exp):
    return (sum(exp), exp)


def check_unit(beta, tol=UNIT_TOL):
    """Return ``beta`` as a float array, raising if it is not a unit vector."""
    beta = np.asarray(beta, dtype=float)
    if abs(np.linalg.norm(beta) - 1.0) > tol:
        raise ArgumentError(f"direction must have unit length, got |beta| = {np.linalg.norm(beta)!r}")
    return beta


class Polynomial:
    """Immutable sparse polynomial in ``num_vars`` variables.

    Parameters
    ----------
    num_vars : int
        Number of variables, at least 1.
    terms : mapping or iterable of (exponent tuple, coefficient)
        Duplicate exponents are summed; zero coefficients are dropped.

    Examples
    --------
    >>> x, y = Polynomial.variables(2)
    >>> p = x**2 + 2 * x * y + 3
    >>> p.evaluate([1.0, 2.0])
    8.0
    """

    __slots__ = ("_n", "_terms", "_exps", "_coefs", "_cache")

    def __init__(self, num_vars: int, terms: Mapping | Iterable = ()):
        if int(num_vars) != num_vars or num_vars < 1:
            raise ArgumentError(f"num_vars must be a positive integer, got {num_vars!r}")
        self._n = int(num_vars)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple, float] = {}
        for exp, coef in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != self._n:
                raise DimensionError(f"exponent {exp} has length {len(exp)}, expected {self._n}")
            if any(e < 0 for e in exp):
                raise ArgumentError(f"negative exponent in {exp}")
            acc[exp] = acc.get(exp, 0.0) + float(coef)
        ordered = sorted((e for e, c in acc.items() if c != 0.0), key=_grlex_key)
        self._terms = {e: acc[e] for e in ordered}
        self._exps = np.array(ordered, dtype=np.int64).reshape(len(ordered), self._n)
        self._coefs = np.array([acc[e] for e in ordered], dtype=float)
        self._cache: dict = {}

    # construction helpers

    @classmethod
    def variables(cls, n: int) -> list["Polynomial"]:
        """The coordinate polynomials x_1, ..., x_n."""
        return [cls(n, {tuple(int(i == j) for j in range(n)): 1.0}) for i in range(n)]

    @classmethod
    def constant(cls, c: float, n: int = 1) -> "Polynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def from_json(cls, obj: dict) -> "Polynomial":
        """Build from ``{"vars": n, "terms": [{"exp": [...], "coef": c}, ...]}``."""
        try:
            n = obj["vars"]
            terms = [(t["exp"], t["coef"]) for t in obj["terms"]]
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed polynomial JSON: {exc}") from exc
        return cls(n, terms)

    def to_json(self) -> dict:
        return {
            "vars": self._n,
            "terms": [{"exp": list(e), "coef": c} for e, c in self._terms.items()],
        }

    # basic properties

    @property
    def num_vars(self) -> int:
        return self._n

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def exponents(self) -> np.ndarray:
        return self._exps.copy()

    @property
    def coefficients(self) -> np.ndarray:
        return self._coefs.copy()

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int | None:
        """Total degree; ``None`` for the zero polynomial."""
        if not self._terms:
            return None
        return int(self._exps.sum(axis=1).max())

    def is_integer(self) -> bool:
        """True when every coefficient equals its rounding."""
        return bool(np.all(self._coefs == np.round(self._coefs)))

    def __repr__(self):
        if not self._terms:
            return f"Polynomial({self._n}, 0)"
        parts = []
        for exp, c in self._terms.items():
            mono = "*".join(f"x{i + 1}^{e}" if e > 1 else f"x{i + 1}" for i, e in enumerate(exp) if e)
            parts.append(f"{c:g}" + (f"*{mono}" if mono else ""))
        return f"Polynomial({self._n}, {' + '.join(parts)})"

    def __eq__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(other, self._n)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        return hash((self._n, tuple(self._terms.items())))

    # arithmetic

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            if other._n != self._n:
                raise DimensionError(f"cannot combine polynomials in {self._n} and {other._n} variables")
            return other
        if isinstance(other, (int, float, np.integer, np.floating)):
            return Polynomial.constant(float(other), self._n)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return Polynomial(self._n, list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self._n, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        out = []
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                out.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
        return Polynomial(self._n, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ArgumentError("polynomial powers must be nonnegative integers")
        result = Polynomial.constant(1.0, self._n)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # evaluation

    def _check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self._n:
            raise DimensionError(f"expected a point of dimension {self._n}, got shape {x.shape}")
        return x

    def evaluate(self, x) -> float:
        """Value at a single point, summed with ``math.fsum`` in graded-lex order."""
        x = self._check_point(x)
        if not self._terms:
            return 0.0
        monos = np.prod(x[None, :] ** self._exps, axis=1)
        return math.fsum(self._coefs * monos)

    def __call__(self, points) -> np.ndarray:
        """Vectorized evaluation at the rows of ``points`` (shape ``(m, n)``)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[-1] != self._n:
            raise DimensionError(f"expected points with {self._n} columns, got shape {pts.shape}")
        if not self._terms:
            return np.zeros(pts.shape[0])
        monos = np.prod(pts[:, None, :] ** self._exps[None, :, :], axis=2)
        return monos @ self._coefs

    # differentiation

    def partial(self, i: int) -> "Polynomial":
        """Exact partial derivative with respect to variable ``i`` (0-based)."""
        key = ("d", i)
        if key not in self._cache:
            out = []
            for exp, c in self._terms.items():
                if exp[i]:
                    e = list(exp)
                    e[i] -= 1
                    out.append((tuple(e), c * exp[i]))
            self._cache[key] = Polynomial(self._n, out)
        return self._cache[key]

    def _second(self, i, j):
        return self.partial(i).partial(j)

    def gradient(self, x) -> np.ndarray:
        x = self._check_point(x)
        return np.array([self.partial(i).evaluate(x) for i in range(self._n)])

    def hessian(self, x) -> np.ndarray:
        x = self._check_point(x)
        n = self._n
        H = np.empty((n, n))
        for i in range(n):
            for j in range(i, n):
                H[i, j] = H[j, i] = self._second(i, j).evaluate(x)
        return H

    def gradient_many(self, points) -> np.ndarray:
        """Gradients at the rows of ``points``, shape ``(m, n)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.stack([self.partial(i)(pts) for i in range(self._n)], axis=1)

    def hessian_many(self, points) -> np.ndarray:
        """Hessians at the rows of ``points``, shape ``(m, n, n)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = self._n
        H = np.empty((pts.shape[0], n, n))
        for i in range(n):
            for j in range(i, n):
                H[:, i, j] = H[:, j, i] = self._second(i, j)(pts)
        return H

    def _jet_tables(self):
        if "jet" not in self._cache:
            n = self._n
            pairs = [(i, j) for i in range(n) for j in range(i, n)]
            polys = [self] + [self.partial(i) for i in range(n)] + [self._second(i, j) for i, j in pairs]
            exps = sorted({e for p in polys for e in p._terms}, key=_grlex_key)
            col = {e: k for k, e in enumerate(exps)}
            C = np.zeros((len(polys), len(exps)))
            for r, p in enumerate(polys):
                for e, c in p._terms.items():
                    C[r, col[e]] = c
            E = np.array(exps, dtype=np.int64).reshape(len(exps), n)
            self._cache["jet"] = (E, C, pairs)
        return self._cache["jet"]

    def jet(self, points):
        """Values, gradients and Hessians at the rows of ``points`` in one pass.

        Returns arrays of shape ``(m,)``, ``(m, n)`` and ``(m, n, n)``.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self._n:
            raise DimensionError(f"expected points with {self._n} columns, got shape {pts.shape}")
        E, C, pairs = self._jet_tables()
        m, n = pts.shape
        if E.shape[0] == 0:
            return np.zeros(m), np.zeros((m, n)), np.zeros((m, n, n))
        monos = np.prod(pts[:, None, :] ** E[None, :, :], axis=2)
        vals = monos @ C.T
        H = np.empty((m, n, n))
        for k, (i, j) in enumerate(pairs):
            H[:, i, j] = H[:, j, i] = vals[:, 1 + n + k]
        return vals[:, 0], vals[:, 1 : 1 + n], H

    def directional_derivs(self, x, beta) -> tuple[float, float]:
        """First and second derivatives of ``t -> p(x + t*beta)`` at ``t = 0``."""
        beta = check_unit(beta)
        x = self._check_point(x)
        if beta.shape != x.shape:
            raise DimensionError("direction and point dimensions differ")
        return float(self.gradient(x) @ beta), float(beta @ self.hessian(x) @ beta)

    def directional_derivs_many(self, points, betas):
        """Vectorized :meth:`directional_derivs` over paired rows."""
        B = np.atleast_2d(np.asarray(betas, dtype=float))
        _, g, H = self.jet(points)
        return np.einsum("mi,mi->m", g, B), np.einsum("mi,mij,mj->m", B, H, B)

    def restrict_to_line(self, alpha, beta) -> "LineRestriction":
        """Univariate polynomial ``t -> p(beta*t + alpha)``."""
        beta = check_unit(beta)
        alpha = self._check_point(alpha)
        if beta.shape != alpha.shape:
            raise DimensionError("direction and point dimensions differ")
        coeffs = np.zeros((self.degree or 0) + 1)
        powers: dict = {}
        for exp, c in self._terms.items():
            acc = np.array([c])
            for i, e in enumerate(exp):
                if e == 0:
                    continue
                if (i, e) not in powers:
                    powers[(i, e)] = npoly.polypow([alpha[i], beta[i]], e)
                acc = npoly.polymul(acc, powers[(i, e)])
            coeffs[: len(acc)] += acc
        return LineRestriction(alpha=alpha, beta=beta, coeffs=coeffs)

    def interval_bounds(self, lo, hi) -> tuple[np.ndarray, np.ndarray]:
        """Natural interval extension over the boxes ``[lo[k], hi[k]]``.

        ``lo`` and ``hi`` have shape ``(m, n)``; returns lower and upper
        enclosures of the polynomial on each box (no directed rounding).
        """
        lo = np.atleast_2d(np.asarray(lo, dtype=float))
        hi = np.atleast_2d(np.asarray(hi, dtype=float))
        m = lo.shape[0]
        tot_lo = np.zeros(m)
        tot_hi = np.zeros(m)
        pow_cache: dict = {}
        for exp, c in self._terms.items():
            t_lo = np.ones(m)
            t_hi = np.ones(m)
            for i, e in enumerate(exp):
                if e == 0:
                    continue
                if (i, e) not in pow_cache:
                    a, b = lo[:, i] ** e, hi[:, i] ** e
                    if e % 2:
                        pow_cache[(i, e)] = (a, b)
                    else:
                        straddle = (lo[:, i] < 0) & (hi[:, i] > 0)
                        pow_cache[(i, e)] = (
                            np.where(straddle, 0.0, np.minimum(a, b)),
                            np.maximum(a, b),
                        )
                p_lo, p_hi = pow_cache[(i, e)]
                cands = np.stack([t_lo * p_lo, t_lo * p_hi, t_hi * p_lo, t_hi * p_hi])
                t_lo, t_hi = cands.min(axis=0), cands.max(axis=0)
            if c >= 0:
                tot_lo += c * t_lo
                tot_hi += c * t_hi
            else:
                tot_lo += c * t_hi
                tot_hi += c * t_lo
        return tot_lo, tot_hi

    # structure and coefficient statistics

    def _require_nonzero(self):
        if not self._terms:
            raise UndefinedDegreeError("the zero polynomial has undefined degree")

    def homogeneous_part(self, j: int) -> "Polynomial":
        return Polynomial(self._n, {e: c for e, c in self._terms.items() if sum(e) == j})

    def leading_form(self) -> "Polynomial":
        """Homogeneous part of top degree."""
        self._require_nonzero()
        return self.homogeneous_part(self.degree)

    def norm_1(self) -> float:
        """Sum of absolute values of the coefficients."""
        self._require_nonzero()
        return math.fsum(np.abs(self._coefs))

    def coeff_stats(self) -> tuple[int, float]:
        """``(degree, max |coefficient|)``."""
        self._require_nonzero()
        return self.degree, float(np.abs(self._coefs).max())

    def abs_coeff_sums(self) -> np.ndarray:
        """Entry ``j`` is the sum of ``|a_nu|`` over terms of total degree ``j``."""
        d = self.degree or 0
        sums = np.zeros(d + 1)
        if self._terms:
            np.add.at(sums, self._exps.sum(axis=1), np.abs(self._coefs))
        return sums

    def univariate_coeffs(self) -> np.ndarray:
        """Coefficients ``a_0, ..., a_d`` of ``a_0 t^d + ... + a_d`` (descending)."""
        if self._n != 1:
            raise DimensionError("univariate_coeffs needs a polynomial in one variable")
        self._require_nonzero()
        d = self.degree
        out = np.zeros(d + 1)
        for (e,), c in self._terms.items():
            out[d - e] = c
        return out


@dataclass(frozen=True)
class LineRestriction:
    """``t -> f(beta*t + alpha)`` stored as ascending univariate coefficients."""

    alpha: np.ndarray
    beta: np.ndarray
    coeffs: np.ndarray

    def __call__(self, t):
        return npoly.polyval(t, self.coeffs)

    def derivative(self, k: int = 1) -> np.ndarray:
        return npoly.polyder(self.coeffs, k)

    def point(self, t) -> np.ndarray:
        return self.beta * t + self.alpha
