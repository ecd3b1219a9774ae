from math import pi

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lpboltz.geometry import (AngleFrame, CVQuadrature, collide, cv_weight, orthonormal_frame,
                              sigma_from_angles, u_nodes, verify_cv_identity)
from lpboltz.kernel import CollisionKernel, constant_kernel, symmetrize

vec = lambda N: arrays(float, N, elements=st.floats(-20, 20))


def _unit(x):
    n = np.linalg.norm(x)
    return x / n if n > 1e-3 else None


@given(N=st.sampled_from([2, 3]), data=st.data())
def test_collision_conserves(N, data):
    v, vs = data.draw(vec(N)), data.draw(vec(N))
    s = _unit(data.draw(vec(N)))
    if s is None:
        return
    vp, vps = collide(v, vs, s)
    scale = 1 + v @ v + vs @ vs
    assert np.allclose(vp + vps, v + vs, atol=1e-12 * np.sqrt(scale))
    assert abs(vp @ vp + vps @ vps - v @ v - vs @ vs) <= 1e-12 * scale
    assert abs(np.linalg.norm(vp - vps) - np.linalg.norm(v - vs)) <= 1e-12 * np.sqrt(scale)


@given(N=st.sampled_from([2, 3]), data=st.data(), theta=st.floats(0, pi))
def test_reflected_angle_swaps_outputs(N, data, theta):
    v, vs = data.draw(vec(N)), data.draw(vec(N))
    k = _unit(v - vs)
    if k is None:
        return
    u = orthonormal_frame(k)[0]
    s1 = sigma_from_angles(AngleFrame(k, theta, u))
    s2 = sigma_from_angles(AngleFrame(k, pi - theta, -u))
    a, b = collide(v, vs, s1)
    c, d = collide(v, vs, s2)
    assert np.allclose(a, d, atol=1e-10) and np.allclose(b, c, atol=1e-10)


@given(N=st.sampled_from([2, 3]), data=st.data())
def test_frame_is_orthonormal(N, data):
    k = _unit(data.draw(vec(N)))
    if k is None:
        return
    E = orthonormal_frame(k)
    assert E.shape == (N - 1, N)
    assert np.allclose(E @ E.T, np.eye(N - 1), atol=1e-13)
    assert np.allclose(E @ k, 0, atol=1e-13)


@pytest.mark.parametrize("N", [2, 3])
def test_u_nodes_symmetric(N):
    nodes, w = u_nodes(N, 8)
    assert w.sum() == pytest.approx(1.0)
    assert np.allclose(w @ nodes, 0, atol=1e-15)


def test_cv_weight():
    jac, st_ = cv_weight(np.pi / 3, 3, 1.0)
    c = np.cos(np.pi / 6)
    assert jac == pytest.approx(c ** -3) and st_ == pytest.approx(1 / c)
    with pytest.raises(ValueError):
        cv_weight(2.0, 3)


def test_invalid_frames():
    with pytest.raises(ValueError):
        AngleFrame(np.array([1.0, 0.0]), 0.1, np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        AngleFrame(np.array([2.0, 0.0]), 0.1, np.array([0.0, 1.0]))


def test_cv_identity_small_levels():
    ker = symmetrize(CollisionKernel(1.0, constant_kernel(1.0, 2)))

    def F(v):
        return np.exp(-np.sum((v - [0.4, 0.1]) ** 2, axis=1) / 2)

    coarse = verify_cv_identity(F, ker, CVQuadrature(n=16, R=10, n_theta=4), v_star=[0.2, -0.3])
    fine = verify_cv_identity(F, ker, CVQuadrature(n=32, R=10, n_theta=8), v_star=[0.2, -0.3])
    assert fine < coarse and fine < 1e-3
