"""Exponential and double-exponential convexification of positive polynomials."""

__version__ = "0.1.0"

from .certificates import CertifiedExponent, Family, LojasiewiczData, certify  # noqa: E402
from .convexifier import ConvexifierSpec, bracket_double_exp, bracket_theta, discriminant_g  # noqa: E402
from .critical import IterationTrace, ProximalConfig, check_lemma63, lower_critical_test, proximal_search  # noqa: E402
from .polynomial import Polynomial  # noqa: E402
from .region import Ball, Box, Polytope, SemialgebraicSet, region_from_json  # noqa: E402
from .solver import SolveResult, argmin, grid_oracle  # noqa: E402
from .verifier import practical_n, reproduce_counterexamples, verify_convexity  # noqa: E402

__all__ = [
    "Ball", "Box", "CertifiedExponent", "ConvexifierSpec", "Family", "IterationTrace", "LojasiewiczData",
    "Polynomial", "Polytope", "ProximalConfig", "SemialgebraicSet", "SolveResult", "argmin",
    "bracket_double_exp", "bracket_theta", "certify", "check_lemma63", "discriminant_g", "grid_oracle",
    "lower_critical_test", "practical_n", "proximal_search", "region_from_json", "reproduce_counterexamples",
    "verify_convexity",
]
