import numpy as np
import pytest
from hypothesis import settings, strategies as st

from convexo.polynomial import Polynomial

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@st.composite
def polynomials(draw, n=None, max_degree=4, max_terms=6):
    """Random small polynomial with bounded integer-ish coefficients."""
    n = draw(st.integers(1, 3)) if n is None else n
    k = draw(st.integers(1, max_terms))
    terms = []
    for _ in range(k):
        exp = draw(st.lists(st.integers(0, max_degree), min_size=n, max_size=n).filter(lambda e: sum(e) <= max_degree))
        coef = draw(st.floats(-3, 3, allow_nan=False).filter(lambda c: abs(c) > 1e-3))
        terms.append((exp, coef))
    return Polynomial(n, terms)


def points(n, m=5, scale=1.5):
    return st.lists(st.lists(st.floats(-scale, scale, allow_nan=False), min_size=n, max_size=n),
                    min_size=m, max_size=m).map(np.array)


@pytest.fixture
def xy():
    return Polynomial.variables(2)


@pytest.fixture
def x1():
    return Polynomial.variables(1)[0]
