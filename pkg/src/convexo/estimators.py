"""scikit-learn style wrappers.

The polynomial and region are hyperparameters; the data are points in the
ambient space. ``ExpConvexifier`` fits a verified exponent and transforms
points to log-values of the convexified function. ``ProximalCriticalPoints``
maps starting points to the limits of the proximal iteration.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .certificates import Family
from .convexifier import ConvexifierSpec
from .critical import ProximalConfig, proximal_search
from .exceptions import DimensionError
from .verifier import practical_n


def _check_points(X, n):
    X = check_array(X, dtype=float, ensure_2d=True)
    if X.shape[1] != n:
        raise DimensionError(f"expected {n} columns, got {X.shape[1]}")
    return X


class ExpConvexifier(BaseEstimator, TransformerMixin):
    """Convexify ``polynomial`` on ``region`` and evaluate the result in log space.

    Parameters
    ----------
    polynomial : Polynomial
    region : ConvexRegion
    family : {"single", "double-outer", "double-inner"}
    N : float, optional
        Fixed exponent. When omitted, :meth:`fit` searches for a practical one.
    xi : array_like, optional
        Center; defaults to the origin.
    xi_radius : float, optional
        Radius of the center ball used during the search. ``None`` means all
        centers (single-exponential only).
    budget, seed : int
        Verification sample count and seed.
    """

    def __init__(self, polynomial=None, region=None, family="single", N=None, xi=None,
                 xi_radius=None, budget=1000, seed=0):
        self.polynomial = polynomial
        self.region = region
        self.family = family
        self.N = N
        self.xi = xi
        self.xi_radius = xi_radius
        self.budget = budget
        self.seed = seed

    def fit(self, X=None, y=None):
        f = self.polynomial
        family = Family(self.family)
        if self.N is not None:
            self.N_ = float(self.N)
            self.mu_hat_ = None
        else:
            res = practical_n(family, f, self.region, self.xi_radius, budget=self.budget, seed=self.seed)
            if res.N is None:
                raise ValueError("no verified exponent found")
            self.N_, self.mu_hat_ = res.N, res.mu_hat
        xi = np.zeros(f.num_vars) if self.xi is None else self.xi
        self.spec_ = ConvexifierSpec(family, self.N_, xi, f)
        self.n_features_in_ = f.num_vars
        return self

    def transform(self, X):
        """Log-values of the convexified function, shape ``(n_samples, 1)``."""
        check_is_fitted(self, "spec_")
        X = _check_points(X, self.n_features_in_)
        return self.spec_.log_value_many(X)[:, None]


class ProximalCriticalPoints(BaseEstimator):
    """Lower critical points reached by the proximal iteration from each start.

    Parameters mirror :class:`ProximalConfig`; ``fit`` only validates the
    configuration because the iteration has no learned state.
    """

    def __init__(self, polynomial=None, region=None, family=None, N=None, step_tol=1e-7,
                 budget=10_000, seed=0):
        self.polynomial = polynomial
        self.region = region
        self.family = family
        self.N = N
        self.step_tol = step_tol
        self.budget = budget
        self.seed = seed

    def fit(self, X=None, y=None):
        self.config_ = ProximalConfig(family=self.family, N=self.N, step_tol=self.step_tol,
                                      budget=self.budget, seed=self.seed)
        self.n_features_in_ = self.polynomial.num_vars
        return self

    def predict(self, X):
        """Final iterate for each starting row of ``X``."""
        check_is_fitted(self, "config_")
        X = _check_points(X, self.n_features_in_)
        self.traces_ = [proximal_search(self.polynomial, self.region, a0, self.config_) for a0 in X]
        return np.array([t.limit for t in self.traces_])
