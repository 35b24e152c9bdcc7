import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randode.inequalities import (discrete_gronwall_bound, gen_triangle,
                                  peter_paul, young)

finite = dict(allow_nan=False, allow_infinity=False)


@given(a=st.floats(0, 1e3, **finite), b=st.floats(0, 1e3, **finite),
       delta=st.floats(1e-3, 1e2, **finite), r=st.floats(1.1, 8, **finite))
def test_young(a, b, delta, r):
    assert a * b <= young(a, b, delta, r) * (1 + 1e-10) + 1e-12


@given(x=st.floats(0, 1e2, **finite), y=st.floats(0, 1e2, **finite),
       n=st.integers(1, 6), delta=st.floats(1e-3, 1.0, **finite))
def test_peter_paul(x, y, n, delta):
    assert (x + y) ** n <= peter_paul(x, y, n, delta) * (1 + 1e-10) + 1e-12


@given(A=st.floats(0, 10, **finite),
       betas=st.lists(st.floats(0, 0.3, **finite), min_size=1, max_size=25))
@settings(max_examples=200)
def test_gronwall(A, betas):
    betas = np.asarray(betas)
    xs = [A]
    for k in range(1, len(betas) + 1):
        xs.append(A + float(np.dot(betas[:k], xs[:k])))
    assert xs[-1] <= discrete_gronwall_bound(A, betas) * (1 + 1e-10) + 1e-12


@given(vals=st.lists(st.floats(-50, 50, **finite), min_size=1, max_size=20),
       m=st.floats(1.0, 6.0, **finite))
def test_gen_triangle(vals, m):
    vals = np.asarray(vals)
    lhs = abs(vals.sum()) ** m
    assert lhs <= gen_triangle(vals, m) * (1 + 1e-10) + 1e-12


def test_young_spec_example():
    # a=2, b=3, delta=1, r=2: ab = 6 <= 2 + 4.5
    assert young(2.0, 3.0, 1.0, 2.0) == pytest.approx(6.5)
    assert 2.0 * 3.0 <= young(2.0, 3.0, 1.0, 2.0)


def test_peter_paul_n1_reduction():
    for x, y, d in [(0.0, 5.0, 0.4), (3.0, 1.0, 0.9), (2.0, 2.0, 1.0)]:
        assert peter_paul(x, y, 1, d) == pytest.approx(x * (1 + d) + 2 * y)
        assert x + y <= peter_paul(x, y, 1, d)


def test_gronwall_geometric_example():
    betas = np.full(10, 0.1)
    xs = [1.0]
    for k in range(1, 11):
        xs.append(1.0 + float(np.dot(betas[:k], xs[:k])))
    assert xs[-1] <= np.exp(0.1 * 10)
    assert discrete_gronwall_bound(1.0, betas) == pytest.approx(np.e)


def test_domain_errors():
    with pytest.raises(ValueError):
        young(1.0, 1.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        young(1.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        young(-1.0, 1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        peter_paul(1.0, 1.0, 0, 1.0)
    with pytest.raises(ValueError):
        peter_paul(1.0, 1.0, 2, -1.0)
    with pytest.raises(ValueError):
        discrete_gronwall_bound(-1.0, np.array([0.1]))
    with pytest.raises(ValueError):
        gen_triangle(np.array([1.0]), 0.5)
