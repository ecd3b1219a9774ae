import numpy as np
import pytest
from hypothesis import given, strategies as st

from lpboltz.interpolation import sample
from lpboltz.state import Distribution, VelocityGrid, maxwellian


@pytest.mark.parametrize("N,n", [(2, 12), (3, 8)])
@pytest.mark.parametrize("order", [1, 3])
def test_reproduces_nodes(N, n, order):
    g = VelocityGrid(N, n, 4.0)
    f = Distribution(g, np.random.default_rng(0).random(g.shape))
    assert np.allclose(sample(f, g.points, order), f.values.ravel(), atol=1e-12)


@given(pt=st.tuples(st.floats(-3.4, 3.4), st.floats(-3.4, 3.4)))
def test_linear_exact_inside(pt):
    g = VelocityGrid(2, 16, 4.0)
    vals = 5.0 + g.points @ np.array([0.3, -0.7])
    f = Distribution(g, vals.reshape(g.shape))
    assert sample(f, np.array([pt]), 1)[0] == pytest.approx(5.0 + 0.3 * pt[0] - 0.7 * pt[1], abs=1e-12)


def test_zero_outside_box():
    g = VelocityGrid(2, 16, 4.0)
    f = Distribution(g, np.ones(g.shape))
    assert np.all(sample(f, np.array([[10.0, 0.0], [0.0, -9.0]]), 3) == 0.0)


def test_cubic_more_accurate_than_linear():
    g = VelocityGrid(2, 32, 6.0)
    M = maxwellian(g)
    pts = np.random.default_rng(1).uniform(-3, 3, size=(200, 2))
    exact = np.exp(-np.sum(pts ** 2, 1) / 2) / (2 * np.pi)
    e1 = np.abs(sample(M, pts, 1) - exact).max()
    e3 = np.abs(sample(M, pts, 3) - exact).max()
    assert e3 < 0.1 * e1
