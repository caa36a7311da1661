"""Exponentially convexified functions, evaluated in log space.

For a positive polynomial ``f`` the three families are

* single:        ``exp(N |x - xi|^2) f(x)``
* double-outer:  ``exp(exp(N |x - xi|^2)) f(x)``
* double-inner:  ``exp(N exp(|x - xi|^2)) f(x)``

All optimization works on the logarithm, which has the same minimizers and
stationary points and does not overflow. Line-convexity certificates are
evaluated with the exponential factor divided out so that sign decisions
never touch overflowed magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .certificates import Family
from .exceptions import ArgumentError, DimensionError, DomainError
from .polynomial import Polynomial, check_unit

# exponent cap before exp() overflows a double
EXP_CAP = 700.0


@dataclass(frozen=True, eq=False)
class ConvexifierSpec:
    """Family, exponent ``N``, center ``xi`` and polynomial ``f``."""

    family: Family
    N: float
    xi: np.ndarray
    f: Polynomial

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).ravel())
        if not self.N > 0:
            raise ArgumentError(f"N must be positive, got {self.N!r}")
        if self.xi.size != self.f.num_vars:
            raise DimensionError(f"xi has dimension {self.xi.size}, polynomial has {self.f.num_vars} variables")

    def with_center(self, xi) -> "ConvexifierSpec":
        return ConvexifierSpec(self.family, self.N, xi, self.f)

    def with_exponent(self, N) -> "ConvexifierSpec":
        return ConvexifierSpec(self.family, N, self.xi, self.f)

    # log-space value and gradient

    def _exponent(self, sq):
        N = self.N
        if self.family is Family.SINGLE_EXP:
            return N * sq
        with np.errstate(over="ignore"):
            if self.family is Family.DOUBLE_EXP_OUTER:
                return np.exp(N * sq)
            return N * np.exp(sq)

    def _exponent_slope(self, sq):
        """Derivative of the exponent with respect to ``|x - xi|^2``."""
        N = self.N
        if self.family is Family.SINGLE_EXP:
            return np.full_like(np.asarray(sq, dtype=float), N)
        with np.errstate(over="ignore"):
            if self.family is Family.DOUBLE_EXP_OUTER:
                return N * np.exp(N * sq)
            return N * np.exp(sq)

    def log_value(self, x) -> float:
        """``log`` of the convexified function at ``x``; raises if ``f(x) <= 0``."""
        x = np.asarray(x, dtype=float)
        fx = self.f.evaluate(x)
        if not fx > 0:
            raise DomainError(f"f(x) = {fx:.6g} <= 0: f must be positive on the region", point=x)
        d = x - self.xi
        return float(self._exponent(d @ d) + np.log(fx))

    def log_value_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        fx = self.f(X)
        bad = np.flatnonzero(~(fx > 0))
        if bad.size:
            k = bad[0]
            raise DomainError(f"f(x) = {fx[k]:.6g} <= 0: f must be positive on the region", point=X[k])
        d = X - self.xi
        return self._exponent(np.einsum("ij,ij->i", d, d)) + np.log(fx)

    def log_gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        fx = self.f.evaluate(x)
        if not fx > 0:
            raise DomainError(f"f(x) = {fx:.6g} <= 0: f must be positive on the region", point=x)
        d = x - self.xi
        return 2.0 * self._exponent_slope(d @ d) * d + self.f.gradient(x) / fx

    def value(self, x) -> float:
        """The convexified function itself; may overflow to ``inf``."""
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_value(x)))

    # line-convexity certificate

    def bracket(self, x, beta) -> float:
        """Sign-equivalent of the second derivative along ``beta`` at ``x``."""
        beta = check_unit(beta)
        x = np.asarray(x, dtype=float)
        return float(self.bracket_many(x[None, :], beta[None, :])[0])

    def bracket_many(self, X, B, jet=None) -> np.ndarray:
        """Vectorized :meth:`bracket`; ``jet`` may carry precomputed ``f.jet(X)``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        fv, g, H = self.f.jet(X) if jet is None else jet
        fb = np.einsum("mi,mi->m", g, B)
        fbb = np.einsum("mi,mij,mj->m", B, H, B)
        d = X - self.xi
        y = np.einsum("mi,mi->m", d, B)
        sq = np.einsum("mi,mi->m", d, d)
        return _bracket_core(self.family, self.N, fv, fb, fbb, y, sq)[0]


def _bracket_core(family, N, fv, fb, fbb, y, sq):
    """Scaled second-derivative factor and a flag for capped exponents."""
    if family is Family.SINGLE_EXP:
        val = (4 * N * N * y * y + 2 * N) * fv + 4 * N * y * fb + fbb
        return val, np.zeros_like(val, dtype=bool)
    # evaluate val / E (bounded terms only), then rescale; overflow gives a signed inf
    with np.errstate(over="ignore"):
        return _double_exp_core(family, N, fv, fb, fbb, y, sq)


def _double_exp_core(family, N, fv, fb, fbb, y, sq):
    if family is Family.DOUBLE_EXP_OUTER:
        expo = N * sq
        capped = expo > EXP_CAP
        E = np.exp(np.minimum(expo, EXP_CAP))
        scaled = 4 * N * N * (1 / E + 1) * y * y * fv + (2 * N * fv + 4 * N * y * fb) / E + fbb / (E * E)
    else:
        capped = sq > EXP_CAP
        E = np.exp(np.minimum(sq, EXP_CAP))
        scaled = 4 * N * N * y * y * fv + (N * (4 * y * y + 2) * fv + 4 * N * y * fb) / E + fbb / (E * E)
    return scaled * E, capped


def _line_terms(f, x, beta):
    beta = check_unit(beta)
    x = np.asarray(x, dtype=float)
    if x.shape != beta.shape or x.size != f.num_vars:
        raise DimensionError("point, direction and polynomial dimensions must agree")
    fv = f.evaluate(x)
    fb, fbb = f.directional_derivs(x, beta)
    return x, beta, fv, fb, fbb


def bracket_theta(f: Polynomial, N: float, xi, x, beta) -> float:
    """``4N^2 y^2 f + 4N y f_beta + 2N f + f_beta_beta`` with ``y = <x - xi, beta>``.

    Equals the second derivative of ``exp(N|x - xi|^2) f`` along ``beta``
    divided by the positive exponential factor.
    """
    x, beta, fv, fb, fbb = _line_terms(f, x, beta)
    y = float((x - np.asarray(xi, dtype=float)) @ beta)
    return 4 * N * N * y * y * fv + 4 * N * y * fb + 2 * N * fv + fbb


def discriminant_g(f: Polynomial, N: float, x, beta) -> float:
    """``2N f^2 + f f_beta_beta - f_beta^2``.

    Positive at ``(x, beta)`` exactly when :func:`bracket_theta` is positive
    there for every center ``xi``, since the bracket is a quadratic in
    ``y`` with discriminant ``-16 N^2`` times this value.
    """
    _, _, fv, fb, fbb = _line_terms(f, x, beta)
    return 2 * N * fv * fv + fv * fbb - fb * fb


def discriminant_g_many(f: Polynomial, N: float, X, B, jet=None) -> np.ndarray:
    fv, g, H = f.jet(X) if jet is None else jet
    fb = np.einsum("mi,mi->m", g, B)
    fbb = np.einsum("mi,mij,mj->m", B, H, B)
    return 2 * N * fv * fv + fv * fbb - fb * fb


def bracket_double_exp(f: Polynomial, N: float, xi, x, beta, inner: bool = False,
                       return_capped: bool = False):
    """Sign-equivalent second derivative of a double-exponential convexification.

    For the outer family this is ``a y^2 + b y + c`` from the quadratic in
    ``y`` divided by ``exp(N|x - xi|^2)``:
    ``4N^2(1+E) y^2 f + 4N y f_beta + 2N f + f_beta_beta / E`` with
    ``E = exp(N|x - xi|^2)``. ``inner=True`` gives the
    ``exp(N exp(|x - xi|^2))`` variant. When the exponent exceeds the
    overflow guard, ``E`` is capped and ``capped`` is reported; the sign is
    still the sign of the true value for polynomial data of moderate size.
    """
    x, beta, fv, fb, fbb = _line_terms(f, x, beta)
    d = x - np.asarray(xi, dtype=float)
    family = Family.DOUBLE_EXP_INNER if inner else Family.DOUBLE_EXP_OUTER
    val, capped = _bracket_core(family, N, np.array([fv]), np.array([fb]), np.array([fbb]),
                                np.array([d @ beta]), np.array([d @ d]))
    if return_capped:
        return float(val[0]), bool(capped[0])
    return float(val[0])
