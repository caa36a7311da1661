"""Seeded low-discrepancy point sets (scrambled Halton)."""

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc


def halton(m, dim, seed=0):
    """``m`` scrambled Halton points in ``[0, 1)^dim``."""
    if m <= 0:
        return np.empty((0, dim))
    return qmc.Halton(d=dim, scramble=True, seed=seed).random(m)


def gaussian_qmc(m, dim, seed=0):
    u = halton(m, dim, seed)
    # keep away from 0 so the inverse cdf stays finite
    return ndtri(np.clip(u, 1e-12, 1 - 1e-12))


def unit_directions(m, dim, seed=0):
    """Quasi-uniform unit vectors in R^dim."""
    if dim == 1:
        return np.where(np.arange(m) % 2 == 0, 1.0, -1.0).reshape(m, 1)
    g = gaussian_qmc(m, dim, seed)
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    return g / norms


def ball_points(m, dim, center=None, radius=1.0, seed=0):
    """Quasi-uniform points of the closed ball."""
    center = np.zeros(dim) if center is None else np.asarray(center, float)
    u = halton(m, dim + 1, seed)
    g = ndtri(np.clip(u[:, :dim], 1e-12, 1 - 1e-12))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    r = radius * u[:, dim:] ** (1.0 / dim)
    return center + g / norms * r


def box_points(m, lo, hi, seed=0):
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    return lo + halton(m, lo.size, seed) * (hi - lo)
