from math import pi

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad as adaptive

from lpboltz.collision import QuadratureSpec
from lpboltz.flow import (FlowConfig, FlowError, Trajectory, bernoulli_K_T, bernoulli_envelope,
                          bkw_K, bkw_distribution, bkw_nonnegative, bkw_rate, check_apriori,
                          gronwall_envelope, longtime_bound, mollify, simulate, small_time_exponent,
                          stable_dt, step)
from lpboltz.kernel import CollisionKernel, constant_kernel, symmetrize
from lpboltz.state import Distribution, NormSpec, VelocityGrid, maxwellian, mixture

from conftest import BIMODAL

FAST = QuadratureSpec(order=4, n_panels=1, interp_order=3)


def _hs(c=1.0, gamma=1.0):
    return symmetrize(CollisionKernel(gamma, constant_kernel(c, 2)))


@pytest.mark.parametrize("c", [1.0, 1 / (2 * pi)])
def test_bkw_rate_against_adaptive_integral(c):
    # lambda = 1/4 * |S^0| * integral over [0, pi] of b sin^2
    ref = 0.25 * 2 * adaptive(lambda t: c * np.sin(t) ** 2, 0, pi)[0]
    assert bkw_rate(_hs(c, 0.0)) == pytest.approx(ref, rel=1e-10)
    assert bkw_rate(_hs(c, 0.0)) == pytest.approx(c * pi / 4, rel=1e-10)


def test_bkw_profile_moments():
    g = VelocityGrid(2, 64, 10.0)
    for K in (0.5, 0.7, 1.0):
        f = Distribution(g, bkw_distribution(g, K)) if bkw_nonnegative(K, 2) else None
        if f is None:
            continue
        assert f.mass == pytest.approx(1.0, rel=1e-8)
        assert f.energy == pytest.approx(2.0, rel=1e-8)   # integral |v|^2 f = N T
    assert bkw_nonnegative(0.5, 2) and not bkw_nonnegative(0.49, 2)
    assert bkw_nonnegative(0.6, 3) and not bkw_nonnegative(0.59, 3)
    assert bkw_K(0.0, 0.55, 0.1) == pytest.approx(0.55)
    assert bkw_K(1e6, 0.55, 0.1) == pytest.approx(1.0)


def test_equilibrium_is_stationary():
    g = VelocityGrid(2, 24, 6.0)
    M = maxwellian(g)
    cfg = FlowConfig(dt=0.1, t_final=0.3, quad=FAST)
    tr = simulate(M, _hs(1 / (8 * pi)), cfg)
    # residual drift is the grid's Q(M, M) error, not a conservation defect
    assert np.ptp(tr.mass) < 1e-4
    assert np.ptp(tr.entropy) < 1e-3


def test_oversized_step_rejected():
    g = VelocityGrid(2, 16, 6.0)
    f = mixture(BIMODAL, g)
    k = _hs()
    dt = 2 * stable_dt(f, k)
    with pytest.raises(ArithmeticError):
        step(f, dt, k, FlowConfig(dt=dt, quad=FAST))
    with pytest.raises(FlowError):
        simulate(f, k, FlowConfig(dt=dt, t_final=dt, quad=FAST))


def test_mollify_preserves_mass():
    g = VelocityGrid(2, 32, 6.0)
    f = mixture(BIMODAL, g)
    assert mollify(f, 0.3).mass == pytest.approx(f.mass, rel=1e-6)


@given(y0=st.floats(1e-3, 1e3), C=st.floats(0, 5), t=st.floats(0, 3))
def test_gronwall_closed_form(y0, C, t):
    assert gronwall_envelope(y0, C, t) == pytest.approx(y0 * np.exp(C * t))


@given(C=st.floats(0.1, 5), K=st.floats(0.1, 5), p=st.floats(1.2, 3), r=st.floats(1, 4),
       gamma=st.floats(0.2, 1), t=st.floats(0.05, 3))
def test_bernoulli_envelope_solves_ode(C, K, p, r, gamma, t):
    """p E' = C E - K E^{1 + gamma/r}, checked by central differences."""
    h = 1e-5 * t
    E = lambda s: bernoulli_envelope(s, C, K, p, r, gamma)
    dE = (E(t + h) - E(t - h)) / (2 * h)
    rhs = (C * E(t) - K * E(t) ** (1 + gamma / r)) / p
    assert p * dE / p == pytest.approx(rhs, rel=1e-4, abs=1e-6 * E(t))


@given(C=st.floats(0.1, 1e6), K=st.floats(1e-3, 10), r=st.sampled_from([2.0, 3.0]),
       gamma=st.floats(0.3, 1))
def test_small_time_exponent(C, K, r, gamma):
    assert small_time_exponent(C, K, 2.0, r, gamma) == pytest.approx(-r / gamma, rel=0.01)


def test_K_T_exponent():
    assert bernoulli_K_T(0.5, 4.0, 2.0, 2.0, 1.0, 1.0) == pytest.approx(2 * 0.5 * 4.0 ** -0.5)
    assert bernoulli_K_T(0.5, 4.0, 2.0, 2.0, 2.0, 1.0) == pytest.approx(2 * 0.5 * 4.0 ** -0.25)
    assert bernoulli_K_T(0.5, 4.0, 2.0, 2.0, 2.0, 1.0, exponent=-0.5) == pytest.approx(0.5)


def test_longtime_bound():
    assert longtime_bound(3.0, 2.0, 1.0, 0.5) == pytest.approx(4.0)
    assert longtime_bound(5.0, 2.0, 1.0, 0.5) == pytest.approx(5.0)
    with pytest.raises(ValueError):
        longtime_bound(1.0, 1.0, 1.0, 0.0)


def test_trajectory_csv(tmp_path):
    g = VelocityGrid(2, 16, 6.0)
    tr = Trajectory()
    for t in (0.0, 0.5):
        tr.record(t, maxwellian(g), ((2.0, 1.0),), (2.0,))
    path = tmp_path / "t.csv"
    tr.write_csv(path)
    head = path.read_text().splitlines()[0].split(",")
    assert head == ["t", "mass", "momentum_x", "momentum_y", "energy", "entropy",
                    "lp_norm_p2_q1", "l1_moment_s2"]
    with pytest.raises(ValueError):
        tr.record(0.5, maxwellian(g), (), ())


def test_apriori_on_short_run():
    g = VelocityGrid(2, 24, 6.0)
    f = mixture(BIMODAL, g)
    spec = NormSpec(2.0, 1.0)
    cfg = FlowConfig(dt=0.1, t_final=0.4, quad=FAST, norms=((2.0, 1.0), (2.0, 1.5)))
    tr = simulate(f, _hs(1 / (8 * pi)), cfg)
    reps = check_apriori(tr, spec, 1.0, C_plus=10.0, K_minus=1e-3)
    assert [r.name for r in reps] == ["apriori_differential", "gronwall"]
    assert all(r.passed for r in reps)
    bad = check_apriori(tr, spec, 1.0, C_plus=0.0, K_minus=100.0)
    assert not bad[0].passed
