import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from holonomy_instantons.dual import Dual, derivative, magnitude, part, standard_part


def test_product_rule():
    x = Dual.seed() + 2.0
    y = x * x * x
    assert standard_part(y) == 8.0
    assert y.du == 12.0


@given(st.floats(min_value=0.1, max_value=50.0), st.floats(min_value=-2.5, max_value=2.5))
def test_power_derivative(x, p):
    assert derivative(lambda t: (1.0 + t) ** p, x) == pytest.approx(p * (1.0 + x) ** (p - 1), rel=1e-12)


@given(st.floats(min_value=0.1, max_value=10.0))
def test_quotient_and_second_derivative(x):
    f = lambda t: 2.0 / (3.0 * (t + 1.0))  # noqa: E731
    assert derivative(f, x) == pytest.approx(-2.0 / (3.0 * (x + 1.0) ** 2), rel=1e-12)
    assert derivative(f, x, order=2) == pytest.approx(4.0 / (3.0 * (x + 1.0) ** 3), rel=1e-12)


def test_nested_tags_stay_separate():
    a, b = Dual.seed(), Dual.seed()
    z = (a + 1.0) * (b + 2.0)
    assert standard_part(part(z, b.tag)) == 1.0
    assert standard_part(part(z, a.tag)) == 2.0
    assert part(part(z, a.tag), b.tag) == 1.0


def test_numpy_components():
    x = Dual.seed() + np.array([1.0, 2.0])
    y = x * x
    assert np.allclose(y.du, [2.0, 4.0])
    assert magnitude(y) == 4.0


def test_sqrt_matches_math():
    assert derivative(lambda t: t ** 0.5, 4.0) == pytest.approx(0.25)
    assert math.isclose(standard_part((Dual.seed() + 9.0).sqrt()), 3.0)
