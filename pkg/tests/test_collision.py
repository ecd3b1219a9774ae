from math import pi

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lpboltz.collision import (QuadratureSpec, eval_Q, lyapunov_direct, lyapunov_functional,
                               r_alpha, r_alpha_derivatives, sigma_rule, weak_form)
from lpboltz.kernel import (CollisionKernel, KernelDomainError, constant_kernel, singular_kernel,
                            sphere_area, split_collision, symmetrize)
from lpboltz.state import Distribution, NormSpec, VelocityGrid, maxwellian, mixture

from conftest import BIMODAL

HS2 = symmetrize(CollisionKernel(1.0, constant_kernel(1.0, 2)))
FAST = QuadratureSpec(order=4, n_panels=1)


@pytest.fixture(scope="module")
def f24(grid24):
    return mixture(BIMODAL, grid24)


def test_sigma_rule_weights_match_angular_mass():
    rule = sigma_rule(HS2, QuadratureSpec())
    # folded constant kernel: 2c on [0, pi/2], times |S^0| = 2
    assert rule.total_weight == pytest.approx(2 * pi, rel=1e-12)


def test_zero_input(grid24):
    z = Distribution.zeros(grid24)
    r = eval_Q(z, z, HS2, FAST)
    assert not r.q_values.any()


def test_symmetric_and_general_paths_agree(f24):
    other = Distribution(f24.grid, f24.values * (1 + 1e-300))
    a = eval_Q(f24, f24, HS2, FAST)
    b = eval_Q(Distribution(f24.grid, f24.values.copy() + 0.0 * other.values), f24, HS2, FAST)
    g = Distribution(f24.grid, np.nextafter(f24.values, 1.0))  # forces the general kernel
    c = eval_Q(g, f24, HS2, FAST)
    assert np.allclose(a.q_values, b.q_values, atol=1e-14)
    scale = np.abs(a.loss).max()
    assert np.abs(a.gain - c.gain).max() < 1e-10 * scale
    assert np.abs(a.loss - c.loss).max() < 1e-10 * scale


def test_bilinear(f24, grid24):
    g = maxwellian(grid24, 1.0, [0.5, 0.0], 0.7)
    a = eval_Q(g, f24, HS2, FAST)
    b = eval_Q(g.scaled(2.0), f24.scaled(3.0), HS2, FAST)
    assert np.allclose(b.q_values, 6 * a.q_values, rtol=1e-12, atol=1e-15)


def test_singular_kernel_rejected(f24):
    ker = symmetrize(CollisionKernel(1.0, singular_kernel(1.0, -1.5, 2)))
    with pytest.raises(KernelDomainError):
        eval_Q(f24, f24, ker)
    cut, _ = split_collision(ker, 0.3)
    assert np.isfinite(eval_Q(f24, f24, cut, FAST).q_values).all()


def test_different_grids_rejected(f24):
    with pytest.raises(ValueError):
        eval_Q(maxwellian(VelocityGrid(2, 16, 8.0)), f24, HS2)


@pytest.mark.parametrize("phi", [lambda v: np.ones(len(v)), lambda v: v[:, 0],
                                 lambda v: np.sum(v * v, 1)])
def test_weak_form_vanishes_on_invariants(phi):
    f = mixture(BIMODAL, VelocityGrid(2, 12, 6.0))
    loss = eval_Q(f, f, HS2, FAST).loss.sum() * f.grid.cell_volume
    assert abs(weak_form(f, HS2, phi, FAST)) < 1e-12 * loss


def test_weak_form_matches_pointwise_q():
    """Two routes to the fourth moment: symmetrized pair sum vs grid integral of Q.

    The net moment is a small difference of gain and loss, so the routes are
    compared on the scale of the loss moment.
    """
    g = VelocityGrid(2, 32, 6.0)
    f = mixture(BIMODAL, g)
    q = QuadratureSpec(order=4, n_panels=1, interp_order=3)
    phi4 = lambda v: np.sum(v * v, 1) ** 2
    r = eval_Q(f, f, HS2, q)
    direct = np.sum(r.q_values.ravel() * phi4(g.points)) * g.cell_volume
    scale = np.sum(r.loss.ravel() * phi4(g.points)) * g.cell_volume
    weak = weak_form(f, HS2, phi4, q)
    assert abs(direct - weak) < 1e-3 * scale


def test_lyapunov_two_routes(bimodal32):
    q = QuadratureSpec(interp_order=3)
    spec = NormSpec(2.0, 1.0)
    a = lyapunov_functional(bimodal32, bimodal32, spec, HS2, q)
    b = lyapunov_direct(bimodal32, bimodal32, spec, HS2, q)
    assert a == pytest.approx(b, rel=1e-3)


vecs = st.lists(st.floats(-30, 30), min_size=3, max_size=3).map(np.array)


@given(v=vecs, vs=vecs, alpha=st.sampled_from([1.0, 1.5, 2.0]), N=st.sampled_from([2, 3]))
def test_r_alpha_vanishes_at_zero(v, vs, alpha, N):
    assert r_alpha(0.0, v[:N], vs[:N], alpha, N) == pytest.approx(0.0, abs=1e-9 * (1 + v @ v) ** alpha)


@given(v=vecs, vs=vecs, N=st.sampled_from([2, 3]), x=st.floats(0.0, 0.7))
def test_r1_closed_form(v, vs, N, x):
    v, vs = v[:N], vs[:N]
    expected = sphere_area(N - 2) * x * x * (vs @ vs - v @ v)
    scale = 1 + v @ v + vs @ vs
    assert r_alpha(x, v, vs, 1.0, N) == pytest.approx(expected, abs=1e-10 * scale)


@settings(max_examples=30)
@given(v=vecs, vs=vecs, alpha=st.sampled_from([1.0, 1.5, 2.0]), N=st.sampled_from([2, 3]),
       x=st.floats(0.05, 0.65))
def test_r_alpha_derivatives_finite_difference(v, vs, alpha, N, x):
    v, vs = v[:N] / 10, vs[:N] / 10
    h = 1e-4
    d1, d2 = r_alpha_derivatives(x, v, vs, alpha, N)
    f = lambda y: r_alpha(y, v, vs, alpha, N)
    fd1 = (f(x + h) - f(x - h)) / (2 * h)
    fd2 = (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
    scale = ((1 + v @ v) * (1 + vs @ vs)) ** alpha
    assert d1 == pytest.approx(fd1, abs=1e-6 * scale)
    assert d2 == pytest.approx(fd2, abs=1e-3 * scale)
